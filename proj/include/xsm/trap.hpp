#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "xsm/memory.hpp"

namespace xsm {

enum class Mode : std::uint8_t { kernel, user };

[[nodiscard]] constexpr std::string_view mode_name(Mode m) noexcept {
  return m == Mode::kernel ? "kernel" : "user";
}

enum class Access : std::uint8_t { read, write, fetch };

/// Exception causes; the value is what lands in EC.
enum class Cause : std::uint8_t {
  illegal_instruction = 0,
  illegal_memory_access = 1,
  page_fault = 2,
  arithmetic = 3,
};

[[nodiscard]] constexpr std::string_view cause_name(Cause c) noexcept {
  switch (c) {
    case Cause::illegal_instruction: return "illegal_instruction";
    case Cause::illegal_memory_access: return "illegal_memory_access";
    case Cause::page_fault: return "page_fault";
    case Cause::arithmetic: return "arithmetic";
  }
  return "?";
}

enum class TrapKind : std::uint8_t { exception, software_int, timer, disk, console };

[[nodiscard]] constexpr std::string_view trap_kind_name(TrapKind k) noexcept {
  switch (k) {
    case TrapKind::exception: return "exception";
    case TrapKind::software_int: return "int";
    case TrapKind::timer: return "timer";
    case TrapKind::disk: return "disk";
    case TrapKind::console: return "console";
  }
  return "?";
}

struct Trap {
  TrapKind kind = TrapKind::exception;
  Cause cause = Cause::illegal_instruction;  // exceptions only
  int number = 0;                            // software_int only
  std::optional<Integer> page;               // EPN for page faults
  std::optional<Integer> address;            // EMA for illegal memory access
  std::string detail;

  static Trap exception(Cause c, std::string why = {}) {
    Trap t;
    t.cause = c;
    t.detail = std::move(why);
    return t;
  }
  static Trap interrupt(TrapKind k, int n = 0) {
    Trap t;
    t.kind = k;
    t.number = n;
    return t;
  }

  [[nodiscard]] std::string describe() const {
    switch (kind) {
      case TrapKind::exception: {
        std::string s(cause_name(cause));
        if (page) s += " page=" + std::to_string(*page);
        if (address) s += " address=" + std::to_string(*address);
        if (!detail.empty()) s += " (" + detail + ")";
        return s;
      }
      case TrapKind::software_int: return "int " + std::to_string(number);
      default: return std::string(trap_kind_name(kind));
    }
  }

  bool operator==(const Trap&) const = default;
};

// Vector table (physical addresses).
inline constexpr Address kExceptionVector = 1024;
inline constexpr Address kTimerVector = 2048;
inline constexpr Address kDiskVector = 3072;
inline constexpr Address kConsoleVector = 4096;
inline constexpr Address kBootAddress = 512;

[[nodiscard]] constexpr Address software_int_vector(int n) noexcept {
  return kPageSize * (10 + 2 * (n - 4));
}

[[nodiscard]] constexpr Address trap_vector(const Trap& t) noexcept {
  switch (t.kind) {
    case TrapKind::exception: return kExceptionVector;
    case TrapKind::software_int: return software_int_vector(t.number);
    case TrapKind::timer: return kTimerVector;
    case TrapKind::disk: return kDiskVector;
    case TrapKind::console: return kConsoleVector;
  }
  return kExceptionVector;
}

}  // namespace xsm
