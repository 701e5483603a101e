#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "xsm/word.hpp"

namespace xsm {

enum class Reg : std::uint8_t {
  R0, R1, R2, R3, R4, R5, R6, R7, R8, R9,
  R10, R11, R12, R13, R14, R15, R16, R17, R18, R19,
  SP, BP, IP, PTBR, PTLR, EIP, EC, EPN, EMA, P0, P1, P2, P3,
};

inline constexpr std::size_t kRegisterCount = 33;
inline constexpr std::size_t kGeneralRegisters = 20;

inline constexpr std::array<std::string_view, kRegisterCount> kRegisterNames = {
    "R0",  "R1",  "R2",  "R3",  "R4",  "R5",  "R6",  "R7",   "R8",   "R9",  "R10",
    "R11", "R12", "R13", "R14", "R15", "R16", "R17", "R18",  "R19",  "SP",  "BP",
    "IP",  "PTBR", "PTLR", "EIP", "EC", "EPN", "EMA", "P0", "P1", "P2", "P3",
};

[[nodiscard]] constexpr std::string_view register_name(Reg r) noexcept {
  return kRegisterNames[static_cast<std::size_t>(r)];
}

[[nodiscard]] constexpr std::optional<Reg> parse_register(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kRegisterCount; ++i)
    if (kRegisterNames[i] == name) return static_cast<Reg>(i);
  return std::nullopt;
}

[[nodiscard]] constexpr Reg general_register(std::size_t index) noexcept {
  return static_cast<Reg>(index);
}

// User mode sees R0..R19, SP, BP and may read IP.
[[nodiscard]] constexpr bool user_accessible(Reg r) noexcept {
  return static_cast<std::size_t>(r) <= static_cast<std::size_t>(Reg::IP);
}

struct RegisterFile {
  std::array<Word, kRegisterCount> words{};

  Word& operator[](Reg r) noexcept { return words[static_cast<std::size_t>(r)]; }
  const Word& operator[](Reg r) const noexcept { return words[static_cast<std::size_t>(r)]; }

  bool operator==(const RegisterFile&) const = default;
};

}  // namespace xsm
