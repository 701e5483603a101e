#pragma once

// Assembly text grammar of the machine. Each memory word that holds code
// holds exactly one instruction:
//
//   OPCODE | OPCODE op | OPCODE op1, op2
//
// Operands are register names, signed decimal immediates, double-quoted
// strings (no escapes) and memory operands [reg] / [imm].

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xsm/registers.hpp"
#include "xsm/word.hpp"

namespace xsm {

enum class Opcode : std::uint8_t {
  MOV, ADD, SUB, MUL, DIV, MOD, INR, DCR,
  LT, GT, EQ, NE, GE, LE,
  JZ, JNZ, JMP, PUSH, POP, CALL, RET, BRKP, INT,
  IRET, HALT, LOAD, LOADI, STORE, STOREI, IN, INI, OUT, PRINT, ENCRYPT, BACKUP, RESTORE,
  TSL, START,
};

inline constexpr std::array<std::string_view, 38> kOpcodeNames = {
    "MOV",  "ADD",   "SUB",   "MUL",    "DIV", "MOD", "INR", "DCR",   "LT",      "GT",
    "EQ",   "NE",    "GE",    "LE",     "JZ",  "JNZ", "JMP", "PUSH",  "POP",     "CALL",
    "RET",  "BRKP",  "INT",   "IRET",   "HALT", "LOAD", "LOADI", "STORE", "STOREI", "IN",
    "INI",  "OUT",   "PRINT", "ENCRYPT", "BACKUP", "RESTORE", "TSL", "START",
};

[[nodiscard]] constexpr std::string_view opcode_name(Opcode op) noexcept {
  return kOpcodeNames[static_cast<std::size_t>(op)];
}

[[nodiscard]] constexpr std::optional<Opcode> parse_opcode(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kOpcodeNames.size(); ++i)
    if (kOpcodeNames[i] == name) return static_cast<Opcode>(i);
  return std::nullopt;
}

/// Kernel-mode-only instructions.
[[nodiscard]] constexpr bool is_privileged(Opcode op) noexcept {
  switch (op) {
    case Opcode::IRET: case Opcode::HALT: case Opcode::LOAD: case Opcode::LOADI:
    case Opcode::STORE: case Opcode::STOREI: case Opcode::IN: case Opcode::INI:
    case Opcode::OUT: case Opcode::PRINT: case Opcode::ENCRYPT: case Opcode::BACKUP:
    case Opcode::RESTORE: case Opcode::TSL: case Opcode::START:
      return true;
    default:
      return false;
  }
}

struct RegisterOperand {
  Reg reg;
  bool operator==(const RegisterOperand&) const = default;
};
struct IntegerOperand {
  Integer value;
  bool operator==(const IntegerOperand&) const = default;
};
struct StringOperand {
  std::string text;
  bool operator==(const StringOperand&) const = default;
};
/// `[reg]` or `[imm]`: the word at the address held by the inner operand.
struct MemoryOperand {
  std::variant<Reg, Integer> base;
  bool operator==(const MemoryOperand&) const = default;
};

using Operand = std::variant<RegisterOperand, IntegerOperand, StringOperand, MemoryOperand>;

struct Instruction {
  Opcode opcode{};
  std::vector<Operand> operands;

  bool operator==(const Instruction&) const = default;
};

[[nodiscard]] inline std::string format_operand(const Operand& op) {
  struct Visitor {
    std::string operator()(const RegisterOperand& r) const { return std::string(register_name(r.reg)); }
    std::string operator()(const IntegerOperand& i) const { return std::to_string(i.value); }
    std::string operator()(const StringOperand& s) const { return '"' + s.text + '"'; }
    std::string operator()(const MemoryOperand& m) const {
      if (const auto* r = std::get_if<Reg>(&m.base)) return "[" + std::string(register_name(*r)) + "]";
      return "[" + std::to_string(std::get<Integer>(m.base)) + "]";
    }
  };
  return std::visit(Visitor{}, op);
}

[[nodiscard]] inline std::string format_instruction(const Instruction& instr) {
  std::string text(opcode_name(instr.opcode));
  for (std::size_t i = 0; i < instr.operands.size(); ++i) {
    text += i == 0 ? " " : ", ";
    text += format_operand(instr.operands[i]);
  }
  return text;
}

namespace detail {

enum OperandKind : unsigned {
  kNone = 0,
  kReg = 1u << 0,
  kInt = 1u << 1,
  kStr = 1u << 2,
  kMem = 1u << 3,
};

struct Shape {
  unsigned count;
  std::array<unsigned, 2> kinds;
};

[[nodiscard]] constexpr Shape operand_shape(Opcode op) noexcept {
  switch (op) {
    case Opcode::MOV: return {2, {kReg | kMem, kReg | kInt | kStr | kMem}};
    case Opcode::ADD: case Opcode::SUB: case Opcode::MUL: case Opcode::DIV: case Opcode::MOD:
      return {2, {kReg, kReg | kInt | kMem}};
    case Opcode::LT: case Opcode::GT: case Opcode::EQ: case Opcode::NE: case Opcode::GE:
    case Opcode::LE:
      return {2, {kReg, kReg | kInt | kStr | kMem}};
    case Opcode::INR: case Opcode::DCR: case Opcode::POP: case Opcode::INI: case Opcode::OUT:
    case Opcode::ENCRYPT:
      return {1, {kReg, kNone}};
    case Opcode::JZ: case Opcode::JNZ: return {2, {kReg, kReg | kInt}};
    case Opcode::JMP: case Opcode::CALL: case Opcode::START: return {1, {kReg | kInt, kNone}};
    case Opcode::PUSH: case Opcode::PRINT: return {1, {kReg | kInt | kStr, kNone}};
    case Opcode::INT: return {1, {kInt, kNone}};
    case Opcode::LOAD: case Opcode::LOADI: case Opcode::STORE: case Opcode::STOREI:
      return {2, {kReg | kInt, kReg | kInt}};
    case Opcode::TSL: return {2, {kReg, kMem}};
    case Opcode::RET: case Opcode::BRKP: case Opcode::IRET: case Opcode::HALT: case Opcode::IN:
    case Opcode::BACKUP: case Opcode::RESTORE:
      return {0, {kNone, kNone}};
  }
  return {0, {kNone, kNone}};
}

[[nodiscard]] constexpr unsigned kind_of(const Operand& op) noexcept {
  switch (op.index()) {
    case 0: return kReg;
    case 1: return kInt;
    case 2: return kStr;
    default: return kMem;
  }
}

[[nodiscard]] inline std::string_view trim(std::string_view s) noexcept {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

[[nodiscard]] inline std::optional<Operand> parse_operand(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') return std::nullopt;
    auto inner = text.substr(1, text.size() - 2);
    if (inner.find('"') != std::string_view::npos) return std::nullopt;
    return StringOperand{std::string(inner)};
  }
  if (text.front() == '[') {
    if (text.back() != ']') return std::nullopt;
    auto inner = trim(text.substr(1, text.size() - 2));
    if (auto r = parse_register(inner)) return MemoryOperand{*r};
    if (auto v = word_as_integer(inner)) return MemoryOperand{*v};
    return std::nullopt;
  }
  if (auto r = parse_register(text)) return RegisterOperand{*r};
  if (auto v = word_as_integer(text)) return IntegerOperand{*v};
  return std::nullopt;
}

// Splits on commas that are outside string literals.
[[nodiscard]] inline std::optional<std::vector<std::string_view>> split_operands(std::string_view text) {
  std::vector<std::string_view> parts;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '"') quoted = !quoted;
    if (text[i] == ',' && !quoted) {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (quoted) return std::nullopt;
  parts.push_back(text.substr(start));
  return parts;
}

}  // namespace detail

/// Parses one instruction word. Returns nullopt for anything that is not a
/// well-formed instruction (unknown opcode, wrong operand count or kind,
/// two memory operands, INT number outside 4..18).
[[nodiscard]] inline std::optional<Instruction> decode(std::string_view word) {
  using namespace detail;
  auto text = trim(word);
  if (text.empty()) return std::nullopt;
  auto space = text.find_first_of(" \t");
  auto mnemonic = text.substr(0, space);
  auto opcode = parse_opcode(mnemonic);
  if (!opcode) return std::nullopt;

  Instruction instr{*opcode, {}};
  const auto rest = space == std::string_view::npos ? std::string_view{} : trim(text.substr(space));
  if (!rest.empty()) {
    auto parts = split_operands(rest);
    if (!parts) return std::nullopt;
    for (auto part : *parts) {
      auto op = parse_operand(part);
      if (!op) return std::nullopt;
      instr.operands.push_back(std::move(*op));
    }
  }

  const auto shape = operand_shape(*opcode);
  if (instr.operands.size() != shape.count) return std::nullopt;
  unsigned memory_operands = 0;
  for (std::size_t i = 0; i < instr.operands.size(); ++i) {
    const auto kind = kind_of(instr.operands[i]);
    if ((shape.kinds[i] & kind) == 0) return std::nullopt;
    if (kind == kMem) ++memory_operands;
  }
  if (memory_operands > 1) return std::nullopt;
  if (instr.opcode == Opcode::INT) {
    const auto n = std::get<IntegerOperand>(instr.operands[0]).value;
    if (n < 4 || n > 18) return std::nullopt;
  }
  return instr;
}

}  // namespace xsm
