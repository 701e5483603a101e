#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "xsm/error.hpp"

namespace xsm::spl {

/// Compile error carrying the source line (0 when not tied to a line).
class CompileError : public Error {
 public:
  CompileError(int line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line), message_(message) {}

  [[nodiscard]] int line() const noexcept { return line_; }
  [[nodiscard]] const std::string& message() const noexcept { return message_; }

 private:
  int line_;
  std::string message_;
};

enum class TokenKind : std::uint8_t { keyword, identifier, integer, string, op, punct, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;  // keywords are lower-cased; strings without quotes
  int line = 0;

  bool operator==(const Token&) const = default;
};

inline constexpr std::array<std::string_view, 29> kKeywords = {
    "alias",  "define",  "if",     "then",  "else",   "endif",      "while", "do",    "endwhile", "breakpoint",
    "halt",   "ireturn", "push",   "pop",   "call",   "return",     "load",  "loadi", "store",    "storei",
    "print",  "in",      "ini",    "out",   "encrypt", "backup",    "restore", "tsl", "start",
};

[[nodiscard]] inline bool is_keyword(std::string_view lowered) {
  return std::find(kKeywords.begin(), kKeywords.end(), lowered) != kKeywords.end();
}

/// Longest-match lexer. `//` starts a comment that runs to end of line.
/// Keywords are case-insensitive; identifiers are case-sensitive.
[[nodiscard]] inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> tokens;
  int line = 1;
  std::size_t i = 0;
  const auto peek = [&](std::size_t k) { return i + k < src.size() ? src[i + k] : '\0'; };

  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string text(src.substr(i, j - i));
      std::string lowered = text;
      std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      if (is_keyword(lowered)) tokens.push_back({TokenKind::keyword, lowered, line});
      else tokens.push_back({TokenKind::identifier, text, line});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      tokens.push_back({TokenKind::integer, std::string(src.substr(i, j - i)), line});
      i = j;
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"') throw CompileError(line, "unterminated string");
      tokens.push_back({TokenKind::string, std::string(src.substr(i + 1, j - i - 1)), line});
      i = j + 1;
      continue;
    }
    static constexpr std::array<std::string_view, 6> kTwoChar = {"==", "!=", "<=", ">=", "&&", "||"};
    const std::string_view two = src.substr(i, 2);
    if (two.size() == 2 && std::find(kTwoChar.begin(), kTwoChar.end(), two) != kTwoChar.end()) {
      if (two == "&&" || two == "||") throw CompileError(line, "boolean operator '" + std::string(two) + "' is not supported");
      tokens.push_back({TokenKind::op, std::string(two), line});
      i += 2;
      continue;
    }
    if (std::string_view("=<>+-*/%").find(c) != std::string_view::npos) {
      tokens.push_back({TokenKind::op, std::string(1, c), line});
      ++i;
      continue;
    }
    if (std::string_view("()[];,").find(c) != std::string_view::npos) {
      tokens.push_back({TokenKind::punct, std::string(1, c), line});
      ++i;
      continue;
    }
    throw CompileError(line, std::string("illegal character '") + c + "'");
  }
  tokens.push_back({TokenKind::end, "", line});
  return tokens;
}

}  // namespace xsm::spl
