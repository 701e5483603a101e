#pragma once

// Lowers an SPL program to machine assembly text at a fixed load address.
// Expressions are evaluated on a four-register operand stack (R16..R19);
// control flow becomes JZ/JMP with absolute targets, two words per
// instruction.

#include <optional>
#include <string>
#include <vector>

#include "xsm/instruction.hpp"
#include "xsm/memory.hpp"
#include "xsm/spl/ast.hpp"
#include "xsm/spl/lexer.hpp"

namespace xsm::spl {

inline constexpr int kScratchDepth = 4;

class CodeGenerator {
 public:
  explicit CodeGenerator(Address base) : base_(base) {}

  /// Returns one instruction per element.
  std::vector<std::string> generate(const std::vector<Stmt>& body) {
    for (const auto& s : body) statement(s);
    std::vector<std::string> out;
    out.reserve(code_.size());
    for (const auto& line : code_) {
      if (line.label < 0) {
        out.push_back(line.text);
      } else {
        out.push_back(line.text + std::to_string(base_ + 2 * static_cast<Integer>(labels_[static_cast<std::size_t>(line.label)])));
      }
    }
    return out;
  }

 private:
  struct Line {
    std::string text;  // for jumps: everything up to the target address
    int label = -1;
  };

  // -- emission -------------------------------------------------------------

  void emit(std::string text) { code_.push_back({std::move(text), -1}); }
  void emit_jump(std::string prefix, int label) { code_.push_back({std::move(prefix), label}); }
  int new_label() {
    labels_.push_back(0);
    return static_cast<int>(labels_.size() - 1);
  }
  void bind(int label) { labels_[static_cast<std::size_t>(label)] = code_.size(); }

  static std::string scratch(int depth) { return "R" + std::to_string(16 + depth); }

  void need_depth(int depth, int line) const {
    if (depth >= kScratchDepth) throw CompileError(line, "expression too complex");
  }

  static std::string literal(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::integer: return std::to_string(e.value);
      case Expr::Kind::string: return '"' + e.text + '"';
      case Expr::Kind::reg: return std::string(register_name(e.reg));
      default: return {};
    }
  }

  static const char* mnemonic(BinaryOp op) {
    switch (op) {
      case BinaryOp::add: return "ADD";
      case BinaryOp::sub: return "SUB";
      case BinaryOp::mul: return "MUL";
      case BinaryOp::div: return "DIV";
      case BinaryOp::mod: return "MOD";
      case BinaryOp::lt: return "LT";
      case BinaryOp::gt: return "GT";
      case BinaryOp::le: return "LE";
      case BinaryOp::ge: return "GE";
      case BinaryOp::eq: return "EQ";
      case BinaryOp::ne: return "NE";
    }
    return "?";
  }

  static bool is_comparison(BinaryOp op) noexcept {
    return op == BinaryOp::lt || op == BinaryOp::gt || op == BinaryOp::le || op == BinaryOp::ge ||
           op == BinaryOp::eq || op == BinaryOp::ne;
  }

  // -- expressions ----------------------------------------------------------

  /// Evaluates `e` into scratch register `depth` and returns its name.
  std::string into_scratch(const Expr& e, int depth) {
    need_depth(depth, e.line);
    const auto dst = scratch(depth);
    switch (e.kind) {
      case Expr::Kind::integer:
      case Expr::Kind::string:
      case Expr::Kind::reg:
        emit("MOV " + dst + ", " + literal(e));
        break;
      case Expr::Kind::deref:
        emit("MOV " + dst + ", " + memory_operand(e.operands[0], depth));
        break;
      case Expr::Kind::negate:
        into_scratch(e.operands[0], depth);
        emit("MUL " + dst + ", -1");
        break;
      case Expr::Kind::binary: {
        into_scratch(e.operands[0], depth);
        const auto& rhs = e.operands[1];
        // Arithmetic accepts register/integer sources; comparisons also
        // take string immediates.
        const bool direct = rhs.kind == Expr::Kind::integer || rhs.kind == Expr::Kind::reg ||
                            (rhs.kind == Expr::Kind::string && is_comparison(e.op));
        const auto src = direct ? literal(rhs) : into_scratch(rhs, depth + 1);
        emit(std::string(mnemonic(e.op)) + " " + dst + ", " + src);
        break;
      }
    }
    return dst;
  }

  /// `[imm]`, `[reg]`, or the address evaluated into scratch `depth`.
  std::string memory_operand(const Expr& address, int depth) {
    if (address.kind == Expr::Kind::integer || address.kind == Expr::Kind::reg) return "[" + literal(address) + "]";
    return "[" + into_scratch(address, depth) + "]";
  }

  /// A register or integer operand, evaluating into scratch when needed.
  std::string reg_or_int(const Expr& e, int depth) {
    if (e.kind == Expr::Kind::integer || e.kind == Expr::Kind::reg) return literal(e);
    return into_scratch(e, depth);
  }

  std::string reg_int_or_string(const Expr& e, int depth) {
    if (e.is_simple()) return literal(e);
    return into_scratch(e, depth);
  }

  std::string register_only(const Expr& e, int depth) {
    if (e.kind == Expr::Kind::reg) return literal(e);
    return into_scratch(e, depth);
  }

  // -- places ---------------------------------------------------------------

  /// Stores register `src` into `place`, using scratch from `depth` for the
  /// address.
  void store_register(const Place& place, const std::string& src, int depth, int line) {
    if (place.kind == Place::Kind::reg) {
      emit("MOV " + std::string(register_name(place.reg)) + ", " + src);
      return;
    }
    need_depth(depth, line);
    emit("MOV " + memory_operand(place.address[0], depth) + ", " + src);
  }

  // -- statements -----------------------------------------------------------

  void assign(const Stmt& s) {
    const auto& place = *s.place;
    const auto& value = s.args[0];
    if (place.kind == Place::Kind::reg) {
      const auto dst = std::string(register_name(place.reg));
      if (value.is_simple()) emit("MOV " + dst + ", " + literal(value));
      else if (value.kind == Expr::Kind::deref) emit("MOV " + dst + ", " + memory_operand(value.operands[0], 0));
      else emit("MOV " + dst + ", " + into_scratch(value, 0));
      return;
    }
    const auto& address = place.address[0];
    const bool simple_address = address.kind == Expr::Kind::integer || address.kind == Expr::Kind::reg;
    const int value_depth = simple_address ? 0 : 1;
    const auto target = memory_operand(address, 0);
    const auto src = value.is_simple() ? literal(value) : into_scratch(value, value_depth);
    emit("MOV " + target + ", " + src);
  }

  void condition_jump(const Expr& cond, int false_label) {
    const auto r = cond.kind == Expr::Kind::reg ? literal(cond) : into_scratch(cond, 0);
    emit_jump("JZ " + r + ", ", false_label);
  }

  void statement(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::assign:
        assign(s);
        break;
      case StmtKind::if_: {
        const int else_label = new_label();
        condition_jump(s.args[0], else_label);
        for (const auto& t : s.then_body) statement(t);
        if (s.else_body.empty()) {
          bind(else_label);
        } else {
          const int end_label = new_label();
          emit_jump("JMP ", end_label);
          bind(else_label);
          for (const auto& t : s.else_body) statement(t);
          bind(end_label);
        }
        break;
      }
      case StmtKind::while_: {
        const int top = new_label();
        const int end = new_label();
        bind(top);
        condition_jump(s.args[0], end);
        for (const auto& t : s.then_body) statement(t);
        emit_jump("JMP ", top);
        bind(end);
        break;
      }
      case StmtKind::breakpoint: emit("BRKP"); break;
      case StmtKind::halt: emit("HALT"); break;
      case StmtKind::ireturn: emit("IRET"); break;
      case StmtKind::return_: emit("RET"); break;
      case StmtKind::backup: emit("BACKUP"); break;
      case StmtKind::restore: emit("RESTORE"); break;
      case StmtKind::in: emit("IN"); break;
      case StmtKind::push: emit("PUSH " + reg_int_or_string(s.args[0], 0)); break;
      case StmtKind::print: emit("PRINT " + reg_int_or_string(s.args[0], 0)); break;
      case StmtKind::call: emit("CALL " + reg_or_int(s.args[0], 0)); break;
      case StmtKind::start: emit("START " + reg_or_int(s.args[0], 0)); break;
      case StmtKind::out: emit("OUT " + register_only(s.args[0], 0)); break;
      case StmtKind::pop:
        if (s.place->kind == Place::Kind::reg) {
          emit("POP " + std::string(register_name(s.place->reg)));
        } else {
          emit("POP R16");
          store_register(*s.place, "R16", 1, s.line);
        }
        break;
      case StmtKind::ini:
        if (s.place->kind == Place::Kind::reg) {
          emit("INI " + std::string(register_name(s.place->reg)));
        } else {
          emit("INI R16");
          store_register(*s.place, "R16", 1, s.line);
        }
        break;
      case StmtKind::encrypt:
        if (s.place->kind == Place::Kind::reg) {
          emit("ENCRYPT " + std::string(register_name(s.place->reg)));
        } else {
          emit("MOV R16, " + memory_operand(s.place->address[0], 0));
          emit("ENCRYPT R16");
          store_register(*s.place, "R16", 1, s.line);
        }
        break;
      case StmtKind::load:
      case StmtKind::loadi:
      case StmtKind::store:
      case StmtKind::storei: {
        static constexpr const char* names[] = {"LOAD", "LOADI", "STORE", "STOREI"};
        const auto index = static_cast<int>(s.kind) - static_cast<int>(StmtKind::load);
        const auto first = reg_or_int(s.args[0], 0);
        const auto second = reg_or_int(s.args[1], 1);
        emit(std::string(names[index]) + " " + first + ", " + second);
        break;
      }
      case StmtKind::tsl: {
        const auto address = memory_operand(s.args[0], 0);
        if (s.place->kind == Place::Kind::reg) {
          emit("TSL " + std::string(register_name(s.place->reg)) + ", " + address);
        } else {
          emit("TSL R17, " + address);
          store_register(*s.place, "R17", 2, s.line);
        }
        break;
      }
    }
  }

  Address base_;
  std::vector<Line> code_;
  std::vector<std::size_t> labels_;
};

[[nodiscard]] inline std::vector<std::string> generate(const Program& program, Address base) {
  if (base < 0 || base > kMemoryWords - 2 || base % 2 != 0)
    throw CompileError(0, "load address must be even and within 0.." + std::to_string(kMemoryWords - 2));
  auto code = CodeGenerator(base).generate(program.body);
  if (base + 2 * static_cast<Integer>(code.size()) > kMemoryWords)
    throw CompileError(0, "program of " + std::to_string(code.size()) + " instructions does not fit at " +
                              std::to_string(base));
  return code;
}

}  // namespace xsm::spl
