#pragma once

// gdb-style kernel debugger. The session is entered when BRKP executes
// (or a watched physical word is written) and the simulator was started in
// debug mode. Commands never change machine state except `step` and `c`,
// which the driver loop carries out.

#include <charconv>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xsm/machine.hpp"

namespace xsm {

struct DebugSession {
  bool active = true;
  std::set<Address> watchpoints;
  std::string last_command;
  int core = 0;  // core whose registers are shown
};

struct DebugAction {
  enum class Kind : std::uint8_t { stay, resume, step, exit };
  Kind kind = Kind::stay;
  Integer count = 0;  // for step
};

inline constexpr std::string_view kDebugPrompt = "(db) ";

namespace detail {

inline std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline std::optional<Integer> parse_number(const std::string& s) { return word_as_integer(s); }

inline std::string show_word(const Word& w) { return w.empty() ? "\"\"" : w; }

}  // namespace detail

inline void print_help(std::ostream& out) {
  out << "commands:\n"
         "  step [n]      execute n instructions (default 1)\n"
         "  c             continue until breakpoint, watchpoint or halt\n"
         "  reg [name]    show one or all registers\n"
         "  mem a b       show physical words a..b\n"
         "  page n        show non-empty words of physical page n\n"
         "  pt            decode the page table at PTBR\n"
         "  watch a       stop after physical word a is written\n"
         "  unwatch a     remove a watchpoint\n"
         "  where         IP, mode and last trap\n"
         "  list          disassemble around IP\n"
         "  help          this text\n"
         "  exit          terminate the simulator\n";
}

/// Runs one debugger command against the machine. An empty line repeats
/// the previous command.
inline DebugAction exec_command(DebugSession& session, const Machine& machine, std::string_view input,
                                std::ostream& out) {
  using detail::parse_number;
  using detail::show_word;

  std::string line(input);
  auto args = detail::split_words(line);
  if (args.empty()) {
    if (session.last_command.empty()) return {};
    line = session.last_command;
    args = detail::split_words(line);
  }
  session.last_command = line;

  const auto& cmd = args[0];
  const auto& core = machine.core(session.core);
  const auto& memory = machine.memory();

  auto number_arg = [&](std::size_t i) -> std::optional<Integer> {
    if (i >= args.size()) {
      out << cmd << ": missing argument\n";
      return std::nullopt;
    }
    auto v = parse_number(args[i]);
    if (!v) out << "invalid number '" << args[i] << "'\n";
    return v;
  };

  if (cmd == "step" || cmd == "s") {
    Integer n = 1;
    if (args.size() > 1) {
      auto v = number_arg(1);
      if (!v) return {};
      if (*v < 1) {
        out << "step count must be positive\n";
        return {};
      }
      n = *v;
    }
    return {DebugAction::Kind::step, n};
  }
  if (cmd == "c" || cmd == "continue") return {DebugAction::Kind::resume, 0};
  if (cmd == "exit" || cmd == "quit") return {DebugAction::Kind::exit, 0};
  if (cmd == "help") {
    print_help(out);
    return {};
  }

  if (cmd == "reg") {
    if (args.size() > 1) {
      auto r = parse_register(args[1]);
      if (!r) {
        out << "unknown register '" << args[1] << "'\n";
        return {};
      }
      out << register_name(*r) << ": " << show_word(core.regs[*r]) << '\n';
      return {};
    }
    for (std::size_t i = 0; i < kRegisterCount; ++i) {
      const auto r = static_cast<Reg>(i);
      out << register_name(r) << ": " << show_word(core.regs[r]) << '\n';
    }
    return {};
  }

  if (cmd == "mem") {
    auto a = number_arg(1);
    if (!a) return {};
    auto b = args.size() > 2 ? number_arg(2) : a;
    if (!b) return {};
    if (!valid_physical(*a) || !valid_physical(*b) || *a > *b) {
      out << "address range must lie within 0.." << kMemoryWords - 1 << '\n';
      return {};
    }
    for (Integer addr = *a; addr <= *b; ++addr) out << addr << ": " << show_word(memory.read(addr)) << '\n';
    return {};
  }

  if (cmd == "page") {
    auto p = number_arg(1);
    if (!p) return {};
    if (*p < 0 || *p >= kPageCount) {
      out << "page must lie within 0.." << kPageCount - 1 << '\n';
      return {};
    }
    const auto words = memory.page(*p);
    std::size_t used = 0;
    for (const auto& w : words) used += w.empty() ? 0 : 1;
    out << "page " << *p << " (" << used << " non-empty words)\n";
    for (Integer i = 0; i < kPageSize; ++i)
      if (!words[static_cast<std::size_t>(i)].empty())
        out << *p * kPageSize + i << ": " << words[static_cast<std::size_t>(i)] << '\n';
    return {};
  }

  if (cmd == "pt") {
    const auto base = word_as_integer(core.regs[Reg::PTBR]);
    const auto length = word_as_integer(core.regs[Reg::PTLR]);
    if (!length || *length <= 0) {
      out << "empty page table\n";
      return {};
    }
    if (!base) {
      out << "PTBR is not numeric\n";
      return {};
    }
    for (Integer p = 0; p < *length; ++p) {
      const Address entry = *base + 2 * p;
      if (!valid_physical(entry) || !valid_physical(entry + 1)) {
        out << p << ": entry outside memory\n";
        break;
      }
      out << p << " -> " << show_word(memory.read(entry)) << " flags " << show_word(memory.read(entry + 1)) << '\n';
    }
    return {};
  }

  if (cmd == "watch" || cmd == "unwatch") {
    auto a = number_arg(1);
    if (!a) return {};
    if (!valid_physical(*a)) {
      out << "address must lie within 0.." << kMemoryWords - 1 << '\n';
      return {};
    }
    if (cmd == "watch") {
      session.watchpoints.insert(*a);
      out << "watchpoint set at " << *a << '\n';
    } else if (session.watchpoints.erase(*a) != 0) {
      out << "watchpoint removed at " << *a << '\n';
    } else {
      out << "no watchpoint at " << *a << '\n';
    }
    return {};
  }

  if (cmd == "where") {
    out << "core " << session.core << " IP " << show_word(core.regs[Reg::IP]) << " mode " << mode_name(core.mode)
        << " last trap " << (core.last_trap ? core.last_trap->describe() : std::string("none")) << '\n';
    return {};
  }

  if (cmd == "list") {
    const auto ip = word_as_integer(core.regs[Reg::IP]);
    if (!ip) {
      out << "IP is not numeric\n";
      return {};
    }
    for (Integer addr = *ip - 4; addr <= *ip + 4; addr += 2) {
      out << (addr == *ip ? "=> " : "   ") << addr << ": ";
      auto where = lookup(addr, Access::fetch, core.mode, core.regs, memory);
      if (!where) out << "<" << where.trap->describe() << ">\n";
      else out << memory.read(where.physical) << '\n';
    }
    return {};
  }

  out << "unknown command '" << cmd << "' (type help)\n";
  return {};
}

}  // namespace xsm
