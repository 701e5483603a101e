#pragma once

// Simulator frontend: configuration, boot, the run loop with the debugger
// hooked in, transcripts and exit reporting.
//
// Exit codes: 0 halt (or debugger exit), 1 fatal machine fault,
// 2 usage/config error, 3 tick limit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xsm/debugger.hpp"
#include "xsm/disk.hpp"
#include "xsm/error.hpp"
#include "xsm/machine.hpp"

namespace xsm {

struct SimConfig {
  std::filesystem::path disk_path;
  bool debug = false;
  std::optional<std::filesystem::path> debug_script;
  std::optional<std::filesystem::path> input_script;
  Integer timer = 32;
  Integer disk_latency = 10;
  Integer console_latency = 5;
  int cores = 1;
  std::optional<Integer> max_ticks;
  std::optional<std::filesystem::path> trace_path;
};

enum class ExitReason : std::uint8_t { halt, fatal, tick_limit, debug_exit };

[[nodiscard]] constexpr std::string_view exit_reason_name(ExitReason r) noexcept {
  switch (r) {
    case ExitReason::halt: return "halt";
    case ExitReason::fatal: return "fatal";
    case ExitReason::tick_limit: return "tick_limit";
    case ExitReason::debug_exit: return "debug_exit";
  }
  return "?";
}

struct ExitReport {
  ExitReason reason = ExitReason::halt;
  Integer ticks = 0;
  std::optional<FatalFault> fault;

  [[nodiscard]] int exit_code() const noexcept {
    switch (reason) {
      case ExitReason::halt: return 0;
      case ExitReason::debug_exit: return 0;
      case ExitReason::fatal: return 1;
      case ExitReason::tick_limit: return 3;
    }
    return 1;
  }
};

/// Configuration or usage problem; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline void validate(const SimConfig& c) {
  if (c.timer < 1) throw UsageError("--timer must be at least 1");
  if (c.disk_latency < 0) throw UsageError("--disk-latency must be non-negative");
  if (c.console_latency < 0) throw UsageError("--console-latency must be non-negative");
  if (c.cores != 1 && c.cores != 2) throw UsageError("--cores must be 1 or 2");
  if (c.max_ticks && *c.max_ticks < 0) throw UsageError("--max-ticks must be non-negative");
}

/// Parses `xsm` arguments. Throws UsageError carrying the usage text on any
/// problem; `--help` is reported through the returned nullopt with the
/// help text written to `out`.
inline std::optional<SimConfig> parse_config(int argc, const char* const* argv, std::ostream& out) {
  SimConfig c;
  std::string disk, debug_script, input, trace;
  std::optional<Integer> max_ticks;
  CLI::App app{"XSM machine simulator", "xsm"};
  app.add_option("--disk", disk, "disk image")->required();
  app.add_flag("--debug", c.debug, "enter the debugger on BRKP");
  app.add_option("--debug-script", debug_script, "debugger commands, one per line");
  app.add_option("--input", input, "console input script, one line per input");
  app.add_option("--timer", c.timer, "timer interval in instructions");
  app.add_option("--disk-latency", c.disk_latency, "disk latency in ticks");
  app.add_option("--console-latency", c.console_latency, "console latency in ticks");
  app.add_option("--cores", c.cores, "1 or 2");
  app.add_option("--max-ticks", max_ticks, "stop after this many ticks");
  app.add_option("--trace", trace, "per-instruction trace file");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help());
  }
  c.disk_path = disk;
  if (!debug_script.empty()) c.debug_script = debug_script;
  if (!input.empty()) c.input_script = input;
  if (!trace.empty()) c.trace_path = trace;
  c.max_ticks = max_ticks;
  try {
    validate(c);
  } catch (const UsageError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help());
  }
  return c;
}

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + std::string(what) + " '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline std::optional<std::string> read_terminal_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace detail

/// Boots the disk image and runs until HALT on core 0, a fatal fault, the
/// debugger's `exit`, or the tick limit. The image is written back only on
/// a clean HALT.
inline ExitReport run(const SimConfig& config, std::ostream& out, std::ostream& err, std::istream& in) {
  validate(config);
  DiskImage disk = [&] {
    try {
      return DiskImage::load(config.disk_path);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }();

  Console console = config.input_script ? Console(detail::read_lines(*config.input_script, "input script"))
                                        : Console(Console::Reader([&in] { return detail::read_terminal_line(in); }));
  console.set_echo(&out);

  std::optional<std::vector<std::string>> debug_lines;
  if (config.debug_script) debug_lines = detail::read_lines(*config.debug_script, "debug script");
  std::size_t debug_cursor = 0;

  std::unique_ptr<std::ofstream> trace;
  if (config.trace_path) {
    trace = std::make_unique<std::ofstream>(*config.trace_path, std::ios::binary | std::ios::trunc);
    if (!*trace) throw UsageError("cannot write trace file '" + config.trace_path->string() + "'");
  }

  Machine machine(DeviceConfig{config.timer, config.disk_latency, config.console_latency}, config.cores,
                  std::move(disk), std::move(console));
  if (trace) machine.set_trace(trace.get());
  machine.boot();

  DebugSession session;
  ExitReport report;

  auto next_command = [&]() -> std::optional<std::string> {
    if (debug_lines) {
      if (debug_cursor >= debug_lines->size()) return std::nullopt;
      return (*debug_lines)[debug_cursor++];
    }
    return detail::read_terminal_line(in);
  };

  auto finish = [&](ExitReason reason) {
    report.reason = reason;
    report.ticks = machine.ticks();
    if (reason == ExitReason::halt) machine.disk().save(config.disk_path);
    if (trace) trace->flush();
    return report;
  };

  auto tick_limit_reached = [&] { return config.max_ticks && machine.ticks() >= *config.max_ticks; };

  auto watch_hit = [&]() -> std::optional<Address> {
    for (auto a : machine.memory().write_log())
      if (session.watchpoints.count(a)) return a;
    return std::nullopt;
  };

  // One machine step with fatal/halt handling. Returns an exit reason when
  // the run is over.
  auto advance = [&](StepResult& r) -> std::optional<ExitReason> {
    r = machine.step();
    if (r.kind == StepResult::Kind::fatal) {
      report.fault = r.fault;
      err << r.fault->describe() << '\n';
      return ExitReason::fatal;
    }
    if (r.kind == StepResult::Kind::halted) return ExitReason::halt;
    return std::nullopt;
  };

  std::optional<std::string> stop_reason;
  while (true) {
    if (stop_reason) {
      out << *stop_reason << '\n';
      stop_reason.reset();
      bool resume = false;
      while (!resume) {
        out << kDebugPrompt;
        auto cmd = next_command();
        if (!cmd) {
          out << "\n";
          resume = true;
          break;
        }
        if (debug_lines) out << *cmd;
        out << '\n';
        const auto action = exec_command(session, machine, *cmd, out);
        switch (action.kind) {
          case DebugAction::Kind::stay:
            break;
          case DebugAction::Kind::resume:
            resume = true;
            break;
          case DebugAction::Kind::exit:
            return finish(ExitReason::debug_exit);
          case DebugAction::Kind::step:
            for (Integer i = 0; i < action.count; ++i) {
              if (tick_limit_reached()) return finish(ExitReason::tick_limit);
              StepResult r;
              if (auto done = advance(r)) return finish(*done);
              if (auto a = watch_hit()) {
                out << "watchpoint " << *a << ": " << detail::show_word(machine.memory().read(*a)) << '\n';
                break;
              }
            }
            break;
        }
      }
      out.flush();
    }

    if (tick_limit_reached()) return finish(ExitReason::tick_limit);
    StepResult r;
    if (auto done = advance(r)) return finish(*done);
    if (!config.debug) continue;
    if (r.breakpoint_core) {
      session.core = *r.breakpoint_core;
      const auto ip = word_as_integer(machine.core(session.core).regs[Reg::IP]).value_or(2) - 2;
      stop_reason = "breakpoint at " + std::to_string(ip) + " on core " + std::to_string(session.core);
    } else if (auto a = watch_hit()) {
      stop_reason = "watchpoint " + std::to_string(*a) + ": " + detail::show_word(machine.memory().read(*a));
    }
  }
}

/// Full `xsm` entry point: parse, run, report. Returns the process exit code.
inline int simulator_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
  try {
    auto config = parse_config(argc, argv, out);
    if (!config) return 0;
    const auto report = run(*config, out, err, in);
    err << "xsm: " << exit_reason_name(report.reason) << " after " << report.ticks << " ticks\n";
    return report.exit_code();
  } catch (const UsageError& e) {
    err << "xsm: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "xsm: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace xsm
