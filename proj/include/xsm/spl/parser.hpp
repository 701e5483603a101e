#pragma once

// Recursive-descent parser for SPL. `alias` and `define` fill the symbol
// table and produce no statements; every identifier in the remaining
// statements is resolved while parsing.

#include <charconv>
#include <limits>
#include <string>
#include <vector>

#include "xsm/spl/ast.hpp"
#include "xsm/spl/lexer.hpp"

namespace xsm::spl {

/// R16-R19 belong to the code generator.
[[nodiscard]] constexpr bool is_scratch(Reg r) noexcept {
  return r == Reg::R16 || r == Reg::R17 || r == Reg::R18 || r == Reg::R19;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Program parse_program() {
    Program program;
    while (!at_end()) {
      if (auto s = statement()) program.body.push_back(std::move(*s));
    }
    program.symbols = symbols_;
    return program;
  }

 private:
  // -- token helpers --------------------------------------------------------

  [[nodiscard]] const Token& peek(std::size_t k = 0) const {
    return tokens_[std::min(pos_ + k, tokens_.size() - 1)];
  }
  [[nodiscard]] bool at_end() const { return peek().kind == TokenKind::end; }
  const Token& advance() {
    const Token& t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }
  [[nodiscard]] bool check(TokenKind kind, std::string_view text) const {
    return peek().kind == kind && peek().text == text;
  }
  bool accept(TokenKind kind, std::string_view text) {
    if (!check(kind, text)) return false;
    advance();
    return true;
  }
  [[noreturn]] void syntax_error(const std::string& expected) const {
    const auto& t = peek();
    std::string found = t.kind == TokenKind::end ? "end of input" : "'" + t.text + "'";
    throw CompileError(t.line, "syntax error: expected " + expected + ", found " + found);
  }
  void expect(TokenKind kind, std::string_view text) {
    if (!accept(kind, text)) syntax_error("'" + std::string(text) + "'");
  }
  void expect_semicolon() { expect(TokenKind::punct, ";"); }
  bool keyword(std::string_view k) { return accept(TokenKind::keyword, k); }

  // -- statements -----------------------------------------------------------

  std::optional<Stmt> statement() {
    const int line = peek().line;
    const auto simple = [&](StmtKind k) {
      expect_semicolon();
      Stmt s;
      s.kind = k;
      s.line = line;
      return s;
    };

    if (keyword("alias")) {
      alias_declaration(line);
      return std::nullopt;
    }
    if (keyword("define")) {
      define_declaration(line);
      return std::nullopt;
    }
    if (keyword("if")) return if_statement(line);
    if (keyword("while")) return while_statement(line);
    if (keyword("breakpoint")) return simple(StmtKind::breakpoint);
    if (keyword("halt")) return simple(StmtKind::halt);
    if (keyword("ireturn")) return simple(StmtKind::ireturn);
    if (keyword("return")) return simple(StmtKind::return_);
    if (keyword("backup")) return simple(StmtKind::backup);
    if (keyword("restore")) return simple(StmtKind::restore);
    if (keyword("in")) return simple(StmtKind::in);
    if (keyword("push")) return expr_statement(StmtKind::push, line);
    if (keyword("call")) return expr_statement(StmtKind::call, line);
    if (keyword("print")) return expr_statement(StmtKind::print, line);
    if (keyword("out")) return expr_statement(StmtKind::out, line);
    if (keyword("start")) return expr_statement(StmtKind::start, line);
    if (keyword("pop")) return place_statement(StmtKind::pop, line);
    if (keyword("ini")) return place_statement(StmtKind::ini, line);
    if (keyword("encrypt")) return place_statement(StmtKind::encrypt, line);
    if (keyword("load")) return disk_statement(StmtKind::load, line);
    if (keyword("loadi")) return disk_statement(StmtKind::loadi, line);
    if (keyword("store")) return disk_statement(StmtKind::store, line);
    if (keyword("storei")) return disk_statement(StmtKind::storei, line);
    if (keyword("tsl")) {
      Stmt s;
      s.kind = StmtKind::tsl;
      s.line = line;
      s.place = place();
      expect(TokenKind::punct, ",");
      s.args.push_back(expression());
      expect_semicolon();
      return s;
    }
    if (peek().kind == TokenKind::identifier || check(TokenKind::punct, "[")) {
      Stmt s;
      s.kind = StmtKind::assign;
      s.line = line;
      s.place = place();
      expect(TokenKind::op, "=");
      s.args.push_back(expression());
      expect_semicolon();
      return s;
    }
    syntax_error("a statement");
  }

  void alias_declaration(int line) {
    if (peek().kind != TokenKind::identifier) syntax_error("alias name");
    const std::string name = advance().text;
    if (peek().kind != TokenKind::identifier) syntax_error("register name");
    const std::string target = advance().text;
    expect_semicolon();
    check_new_name(name, line);
    const auto r = parse_register(target);
    if (!r) throw CompileError(line, "'" + target + "' is not a register");
    if (is_scratch(*r)) throw CompileError(line, "cannot alias scratch register " + target);
    if (*r == Reg::IP) throw CompileError(line, "cannot alias IP");
    symbols_.aliases.emplace(name, *r);
  }

  void define_declaration(int line) {
    if (peek().kind != TokenKind::identifier) syntax_error("constant name");
    const std::string name = advance().text;
    Constant value;
    if (peek().kind == TokenKind::string) {
      value = advance().text;
    } else {
      const bool negative = accept(TokenKind::op, "-");
      if (peek().kind != TokenKind::integer) syntax_error("literal");
      const auto v = integer_literal(advance());
      value = negative ? -v : v;
    }
    expect_semicolon();
    check_new_name(name, line);
    symbols_.constants.emplace(name, std::move(value));
  }

  void check_new_name(const std::string& name, int line) const {
    if (symbols_.contains(name)) throw CompileError(line, "duplicate name '" + name + "'");
    if (parse_register(name)) throw CompileError(line, "'" + name + "' is a register name");
  }

  Stmt if_statement(int line) {
    Stmt s;
    s.kind = StmtKind::if_;
    s.line = line;
    expect(TokenKind::punct, "(");
    s.args.push_back(expression());
    expect(TokenKind::punct, ")");
    expect(TokenKind::keyword, "then");
    while (!check(TokenKind::keyword, "else") && !check(TokenKind::keyword, "endif")) {
      if (at_end()) syntax_error("'endif'");
      if (auto st = statement()) s.then_body.push_back(std::move(*st));
    }
    if (keyword("else")) {
      while (!check(TokenKind::keyword, "endif")) {
        if (at_end()) syntax_error("'endif'");
        if (auto st = statement()) s.else_body.push_back(std::move(*st));
      }
    }
    expect(TokenKind::keyword, "endif");
    expect_semicolon();
    return s;
  }

  Stmt while_statement(int line) {
    Stmt s;
    s.kind = StmtKind::while_;
    s.line = line;
    expect(TokenKind::punct, "(");
    s.args.push_back(expression());
    expect(TokenKind::punct, ")");
    expect(TokenKind::keyword, "do");
    while (!check(TokenKind::keyword, "endwhile")) {
      if (at_end()) syntax_error("'endwhile'");
      if (auto st = statement()) s.then_body.push_back(std::move(*st));
    }
    expect(TokenKind::keyword, "endwhile");
    expect_semicolon();
    return s;
  }

  Stmt expr_statement(StmtKind kind, int line) {
    Stmt s;
    s.kind = kind;
    s.line = line;
    s.args.push_back(expression());
    expect_semicolon();
    return s;
  }

  Stmt place_statement(StmtKind kind, int line) {
    Stmt s;
    s.kind = kind;
    s.line = line;
    s.place = place();
    expect_semicolon();
    return s;
  }

  Stmt disk_statement(StmtKind kind, int line) {
    Stmt s;
    s.kind = kind;
    s.line = line;
    expect(TokenKind::punct, "(");
    s.args.push_back(expression());
    expect(TokenKind::punct, ",");
    s.args.push_back(expression());
    expect(TokenKind::punct, ")");
    expect_semicolon();
    return s;
  }

  Place place() {
    const int line = peek().line;
    if (accept(TokenKind::punct, "[")) {
      Place p;
      p.kind = Place::Kind::deref;
      p.address.push_back(expression());
      expect(TokenKind::punct, "]");
      return p;
    }
    if (peek().kind != TokenKind::identifier) syntax_error("a register, alias or [address]");
    const std::string name = advance().text;
    if (symbols_.constants.count(name)) throw CompileError(line, "cannot assign to constant '" + name + "'");
    const Reg r = resolve_register(name, line);
    if (r == Reg::IP) throw CompileError(line, "IP is not writable");
    Place p;
    p.reg = r;
    return p;
  }

  Reg resolve_register(const std::string& name, int line) const {
    if (auto it = symbols_.aliases.find(name); it != symbols_.aliases.end()) return it->second;
    if (auto r = parse_register(name)) {
      if (is_scratch(*r)) throw CompileError(line, "scratch register " + name + " is reserved");
      return *r;
    }
    throw CompileError(line, "undefined identifier '" + name + "'");
  }

  // -- expressions ----------------------------------------------------------

  Expr expression() {
    Expr lhs = additive();
    while (peek().kind == TokenKind::op) {
      const auto& t = peek();
      BinaryOp op;
      if (t.text == "<") op = BinaryOp::lt;
      else if (t.text == ">") op = BinaryOp::gt;
      else if (t.text == "<=") op = BinaryOp::le;
      else if (t.text == ">=") op = BinaryOp::ge;
      else if (t.text == "==") op = BinaryOp::eq;
      else if (t.text == "!=") op = BinaryOp::ne;
      else break;
      const int line = advance().line;
      lhs = Expr::binary(op, std::move(lhs), additive(), line);
    }
    return lhs;
  }

  Expr additive() {
    Expr lhs = term();
    while (check(TokenKind::op, "+") || check(TokenKind::op, "-")) {
      const auto& t = advance();
      const auto op = t.text == "+" ? BinaryOp::add : BinaryOp::sub;
      lhs = Expr::binary(op, std::move(lhs), term(), t.line);
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (check(TokenKind::op, "*") || check(TokenKind::op, "/") || check(TokenKind::op, "%")) {
      const auto& t = advance();
      const auto op = t.text == "*" ? BinaryOp::mul : t.text == "/" ? BinaryOp::div : BinaryOp::mod;
      lhs = Expr::binary(op, std::move(lhs), unary(), t.line);
    }
    return lhs;
  }

  Expr unary() {
    if (check(TokenKind::op, "-")) {
      const int line = advance().line;
      if (peek().kind == TokenKind::integer) return Expr::integer(-integer_literal(advance()), line);
      return Expr::negate(unary(), line);
    }
    return primary();
  }

  Expr primary() {
    const auto& t = peek();
    const int line = t.line;
    switch (t.kind) {
      case TokenKind::integer:
        return Expr::integer(integer_literal(advance()), line);
      case TokenKind::string:
        return Expr::string(advance().text, line);
      case TokenKind::identifier: {
        const std::string name = advance().text;
        if (auto it = symbols_.constants.find(name); it != symbols_.constants.end()) {
          if (const auto* v = std::get_if<Integer>(&it->second)) return Expr::integer(*v, line);
          return Expr::string(std::get<std::string>(it->second), line);
        }
        return Expr::reg_ref(resolve_register(name, line), line);
      }
      case TokenKind::punct:
        if (accept(TokenKind::punct, "(")) {
          Expr e = expression();
          expect(TokenKind::punct, ")");
          return e;
        }
        if (accept(TokenKind::punct, "[")) {
          Expr address = expression();
          expect(TokenKind::punct, "]");
          return Expr::deref(std::move(address), line);
        }
        break;
      default:
        break;
    }
    syntax_error("an expression");
  }

  static Integer integer_literal(const Token& t) {
    Integer v = 0;
    auto [end, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || end != t.text.data() + t.text.size())
      throw CompileError(t.line, "integer literal out of range: " + t.text);
    return v;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  SymbolTable symbols_;
};

[[nodiscard]] inline Program parse(std::vector<Token> tokens) { return Parser(std::move(tokens)).parse_program(); }

}  // namespace xsm::spl
