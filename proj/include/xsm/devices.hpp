#pragma once

// Timer, disk controller and console. One tick is one executed
// instruction; every countdown is measured in ticks. A device completes its
// side effect (copy, print, deposit) before its interrupt becomes pending.

#include <deque>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "xsm/disk.hpp"
#include "xsm/memory.hpp"
#include "xsm/trap.hpp"

namespace xsm {

struct DeviceConfig {
  Integer timer_interval = 32;
  Integer disk_latency = 10;
  Integer console_latency = 5;

  bool operator==(const DeviceConfig&) const = default;
};

struct PendingInterrupts {
  bool timer = false;
  bool disk = false;
  bool console = false;

  [[nodiscard]] bool any() const noexcept { return timer || disk || console; }
  void raise(TrapKind k) noexcept {
    if (k == TrapKind::timer) timer = true;
    if (k == TrapKind::disk) disk = true;
    if (k == TrapKind::console) console = true;
  }
  /// Removes and returns the highest-priority pending interrupt.
  std::optional<TrapKind> take() noexcept {
    if (timer) { timer = false; return TrapKind::timer; }
    if (disk) { disk = false; return TrapKind::disk; }
    if (console) { console = false; return TrapKind::console; }
    return std::nullopt;
  }
  [[nodiscard]] bool contains(TrapKind k) const noexcept {
    return (k == TrapKind::timer && timer) || (k == TrapKind::disk && disk) ||
           (k == TrapKind::console && console);
  }

  bool operator==(const PendingInterrupts&) const = default;
};

enum class DiskOpKind : std::uint8_t { load, store };

struct DiskOp {
  DiskOpKind kind{};
  Integer page = 0;
  Integer block = 0;
  Integer countdown = 0;
  bool fresh = true;  // issued during the current step; skips that step's tick
  bool operator==(const DiskOp&) const = default;
};

struct OutputOp {
  Word word;
  Integer countdown = 0;
  bool fresh = true;
  bool operator==(const OutputOp&) const = default;
};

struct InputOp {
  std::optional<Word> line;  // nullopt: input exhausted, never completes
  Integer countdown = 0;
  bool fresh = true;
  bool operator==(const InputOp&) const = default;
};

struct DeviceState {
  DeviceConfig config;
  Integer timer_countdown = 32;
  std::optional<DiskOp> disk_op;
  std::deque<OutputOp> console_out;
  std::optional<InputOp> console_in;
  PendingInterrupts pending;
  std::vector<TrapKind> completed_at_issue;  // zero-latency completions in the current step

  DeviceState() = default;
  explicit DeviceState(DeviceConfig c) : config(c), timer_countdown(c.timer_interval) {}

  bool operator==(const DeviceState&) const = default;
};

/// Host side of the console: where input lines come from and where output
/// words go. Output is always recorded; `echo`, when set, also receives it.
class Console {
 public:
  using Reader = std::function<std::optional<std::string>()>;

  Console() = default;
  explicit Console(std::vector<std::string> script) : script_(script.begin(), script.end()) {}
  explicit Console(Reader reader) : reader_(std::move(reader)) {}

  std::optional<Word> next_line() {
    if (reader_) return reader_();
    if (script_.empty()) return std::nullopt;
    Word line = std::move(script_.front());
    script_.pop_front();
    return line;
  }

  void emit(const Word& w) {
    output_.push_back(w);
    if (echo_) {
      *echo_ << w << '\n';
      echo_->flush();
    }
  }

  void set_echo(std::ostream* out) noexcept { echo_ = out; }
  [[nodiscard]] const std::vector<Word>& output() const noexcept { return output_; }

 private:
  std::deque<std::string> script_;
  Reader reader_;
  std::vector<Word> output_;
  std::ostream* echo_ = nullptr;
};

/// What a device touches when it completes.
struct DeviceBus {
  Memory& memory;
  DiskImage& disk;
  Word& port0;
  Console& console;
};

namespace detail {
inline void transfer(DiskOpKind kind, Integer page, Integer block, Memory& memory, DiskImage& disk) {
  if (kind == DiskOpKind::load) {
    std::vector<Word> words(disk.block(block).begin(), disk.block(block).end());
    memory.store_page(page, words);
  } else {
    std::vector<Word> words(memory.page(page).begin(), memory.page(page).end());
    disk.store_block(block, words);
  }
}
}  // namespace detail

/// Advances every device by one tick. Returns the interrupts raised by this
/// tick, in completion order.
inline std::vector<TrapKind> tick(DeviceState& d, DeviceBus bus) {
  std::vector<TrapKind> raised = std::move(d.completed_at_issue);
  d.completed_at_issue.clear();
  const auto raise = [&](TrapKind k) {
    d.pending.raise(k);
    raised.push_back(k);
  };

  if (--d.timer_countdown <= 0) {
    d.timer_countdown = d.config.timer_interval;
    raise(TrapKind::timer);
  }

  if (d.disk_op) {
    auto& op = *d.disk_op;
    if (op.fresh) {
      op.fresh = false;
    } else if (--op.countdown <= 0) {
      detail::transfer(op.kind, op.page, op.block, bus.memory, bus.disk);
      d.disk_op.reset();
      raise(TrapKind::disk);
    }
  }

  for (auto it = d.console_out.begin(); it != d.console_out.end();) {
    if (it->fresh) {
      it->fresh = false;
      ++it;
    } else if (--it->countdown <= 0) {
      bus.console.emit(it->word);
      it = d.console_out.erase(it);
      raise(TrapKind::console);
    } else {
      ++it;
    }
  }

  if (d.console_in && d.console_in->line) {
    auto& op = *d.console_in;
    if (op.fresh) {
      op.fresh = false;
    } else if (--op.countdown <= 0) {
      bus.port0 = *op.line;
      d.console_in.reset();
      raise(TrapKind::console);
    }
  } else if (d.console_in) {
    d.console_in->fresh = false;
  }

  return raised;
}

/// LOAD/STORE (scheduled) and LOADI/STOREI (immediate). Returns an
/// illegal-instruction trap for out-of-range operands or when a scheduled
/// request finds the controller busy. With latency 0 a scheduled request
/// completes and raises its interrupt at once.
inline std::optional<Trap> disk_request(DeviceState& d, DiskOpKind kind, Integer page, Integer block,
                                        bool immediate, DeviceBus bus) {
  if (page < 0 || page >= kPageCount)
    return Trap::exception(Cause::illegal_instruction, "page out of range");
  if (block < 0 || block >= kBlockCount)
    return Trap::exception(Cause::illegal_instruction, "block out of range");
  if (immediate) {
    detail::transfer(kind, page, block, bus.memory, bus.disk);
    return std::nullopt;
  }
  if (d.disk_op) return Trap::exception(Cause::illegal_instruction, "disk busy");
  if (d.config.disk_latency == 0) {
    detail::transfer(kind, page, block, bus.memory, bus.disk);
    d.pending.raise(TrapKind::disk);
    d.completed_at_issue.push_back(TrapKind::disk);
    return std::nullopt;
  }
  d.disk_op = DiskOp{kind, page, block, d.config.disk_latency, true};
  return std::nullopt;
}

/// PRINT (synchronous) and OUT (scheduled, console interrupt on completion).
inline void console_output(DeviceState& d, Word w, bool synchronous, Console& console) {
  if (synchronous || d.config.console_latency == 0) {
    console.emit(w);
    if (!synchronous) {
      d.pending.raise(TrapKind::console);
      d.completed_at_issue.push_back(TrapKind::console);
    }
    return;
  }
  d.console_out.push_back(OutputOp{std::move(w), d.config.console_latency, true});
}

/// IN: schedules a read. Returns an illegal-instruction trap when a read is
/// already in flight. When input is exhausted the read never completes.
inline std::optional<Trap> console_input_async(DeviceState& d, DeviceBus bus) {
  if (d.console_in) return Trap::exception(Cause::illegal_instruction, "console input busy");
  auto line = bus.console.next_line();
  if (line && d.config.console_latency == 0) {
    bus.port0 = *line;
    d.pending.raise(TrapKind::console);
    d.completed_at_issue.push_back(TrapKind::console);
    return std::nullopt;
  }
  d.console_in = InputOp{std::move(line), d.config.console_latency, true};
  return std::nullopt;
}

/// INI: the next input line, or nullopt when input is exhausted.
inline std::optional<Word> console_input_sync(Console& console) { return console.next_line(); }

}  // namespace xsm
