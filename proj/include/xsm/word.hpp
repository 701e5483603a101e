#pragma once

// The storage unit of the string machine: every memory cell, register and
// disk cell holds one arbitrary string. A word is numeric when it is an
// optional '-' followed by one or more decimal digits and fits in int64.

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace xsm {

using Word = std::string;
using Integer = std::int64_t;

[[nodiscard]] inline bool looks_numeric(std::string_view text) noexcept {
  if (!text.empty() && text.front() == '-') text.remove_prefix(1);
  if (text.empty()) return false;
  for (char c : text)
    if (c < '0' || c > '9') return false;
  return true;
}

/// Parses a numeric word. Returns nullopt for non-numeric text and for
/// values outside the int64 range.
[[nodiscard]] inline std::optional<Integer> word_as_integer(std::string_view text) noexcept {
  if (!looks_numeric(text)) return std::nullopt;
  Integer value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
  return value;
}

[[nodiscard]] inline bool is_numeric(std::string_view text) noexcept {
  return word_as_integer(text).has_value();
}

[[nodiscard]] inline Word integer_word(Integer value) { return std::to_string(value); }

}  // namespace xsm
