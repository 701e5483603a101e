#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "xsm/registers.hpp"
#include "xsm/word.hpp"

namespace xsm::spl {

enum class BinaryOp : std::uint8_t { add, sub, mul, div, mod, lt, gt, le, ge, eq, ne };

struct Expr {
  enum class Kind : std::uint8_t { integer, string, reg, deref, negate, binary };
  Kind kind = Kind::integer;
  Integer value = 0;       // integer
  std::string text;        // string
  Reg reg = Reg::R0;       // reg
  BinaryOp op = BinaryOp::add;
  std::vector<Expr> operands;  // deref/negate: 1, binary: 2
  int line = 0;

  [[nodiscard]] bool is_simple() const noexcept {
    return kind == Kind::integer || kind == Kind::string || kind == Kind::reg;
  }

  static Expr integer(Integer v, int line = 0) {
    Expr e;
    e.kind = Kind::integer;
    e.value = v;
    e.line = line;
    return e;
  }
  static Expr string(std::string s, int line = 0) {
    Expr e;
    e.kind = Kind::string;
    e.text = std::move(s);
    e.line = line;
    return e;
  }
  static Expr reg_ref(Reg r, int line = 0) {
    Expr e;
    e.kind = Kind::reg;
    e.reg = r;
    e.line = line;
    return e;
  }
  static Expr deref(Expr address, int line = 0) {
    Expr e;
    e.kind = Kind::deref;
    e.operands.push_back(std::move(address));
    e.line = line;
    return e;
  }
  static Expr negate(Expr inner, int line = 0) {
    Expr e;
    e.kind = Kind::negate;
    e.operands.push_back(std::move(inner));
    e.line = line;
    return e;
  }
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs, int line = 0) {
    Expr e;
    e.kind = Kind::binary;
    e.op = op;
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    e.line = line;
    return e;
  }

  bool operator==(const Expr&) const = default;
};

/// Assignable location: a register or a memory dereference.
struct Place {
  enum class Kind : std::uint8_t { reg, deref };
  Kind kind = Kind::reg;
  Reg reg = Reg::R0;
  std::vector<Expr> address;  // one element when deref

  bool operator==(const Place&) const = default;
};

enum class StmtKind : std::uint8_t {
  assign, if_, while_, breakpoint, halt, ireturn, return_, push, pop, call,
  load, loadi, store, storei, print, in, ini, out, encrypt, backup, restore, tsl, start,
};

struct Stmt {
  StmtKind kind = StmtKind::halt;
  int line = 0;
  std::optional<Place> place;
  std::vector<Expr> args;       // condition for if/while; operands otherwise
  std::vector<Stmt> then_body;  // if: then-branch, while: body
  std::vector<Stmt> else_body;

  bool operator==(const Stmt&) const = default;
};

using Constant = std::variant<Integer, std::string>;

struct SymbolTable {
  std::map<std::string, Reg> aliases;
  std::map<std::string, Constant> constants;

  [[nodiscard]] bool contains(const std::string& name) const {
    return aliases.count(name) != 0 || constants.count(name) != 0;
  }
};

struct Program {
  std::vector<Stmt> body;
  SymbolTable symbols;
};

}  // namespace xsm::spl
