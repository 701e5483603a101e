#pragma once

// The CPU: address translation, instruction semantics, trap delivery and
// the step loop. A machine has one or two cores sharing memory, devices
// and disk. Core 0 starts at boot; core 1 only runs after START.
//
// Conventions:
//   - one instruction per two words; IP advances by 2
//   - the stack grows upward (PUSH increments SP, then stores)
//   - exceptions go to 1024 with EIP/EC/EPN/EMA set and nothing pushed
//   - interrupts and INT push the resume address and jump to their vector
//   - an exception while already in kernel mode is a fatal machine fault

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "xsm/devices.hpp"
#include "xsm/disk.hpp"
#include "xsm/instruction.hpp"
#include "xsm/memory.hpp"
#include "xsm/registers.hpp"
#include "xsm/trap.hpp"
#include "xsm/word.hpp"

namespace xsm {

struct CoreState {
  RegisterFile regs;
  Mode mode = Mode::kernel;
  bool started = false;
  bool halted = false;
  std::optional<Trap> last_trap;

  bool operator==(const CoreState&) const = default;
};

struct MachineState {
  std::array<CoreState, 2> cores;
  Memory memory;
  int core_count = 1;

  bool operator==(const MachineState&) const = default;
};

struct FatalFault {
  int core = 0;
  Word ip;
  std::optional<Cause> cause;
  std::string message;

  [[nodiscard]] std::string describe() const {
    std::string s = "fatal machine fault on core " + std::to_string(core) + " at IP " +
                    (ip.empty() ? std::string("\"\"") : ip);
    if (cause) s += ": " + std::string(cause_name(*cause));
    if (!message.empty()) s += " (" + message + ")";
    return s;
  }
};

// ---------------------------------------------------------------------------
// Address translation
// ---------------------------------------------------------------------------

struct Translation {
  Address physical = 0;
  std::optional<Trap> trap;
  // Page-table flag word to rewrite (Referenced/Dirty) on success.
  std::optional<std::pair<Address, Word>> flag_update;

  explicit operator bool() const noexcept { return !trap; }
};

namespace detail {
inline Trap memory_violation(Integer addr, std::string why = {}) {
  auto t = Trap::exception(Cause::illegal_memory_access, std::move(why));
  t.address = addr;
  return t;
}
}  // namespace detail

/// Pure lookup: computes the physical address (or trap) without touching
/// memory. Page-table entries are two words at PTBR + 2*page: the physical
/// page number and a 4-character flag word (Valid, Writable, Referenced,
/// Dirty).
[[nodiscard]] inline Translation lookup(Integer addr, Access access, Mode mode, const RegisterFile& regs,
                                        const Memory& memory) {
  Translation out;
  if (mode == Mode::kernel) {
    if (!valid_physical(addr)) out.trap = detail::memory_violation(addr);
    else out.physical = addr;
    return out;
  }

  const auto base = word_as_integer(regs[Reg::PTBR]);
  const auto length = word_as_integer(regs[Reg::PTLR]);
  if (addr < 0) {
    out.trap = detail::memory_violation(addr);
    return out;
  }
  if (!base || !length) {
    out.trap = detail::memory_violation(addr, "page table registers not numeric");
    return out;
  }
  const Integer page = addr / kPageSize;
  if (page >= *length) {
    out.trap = detail::memory_violation(addr);
    return out;
  }
  const Address entry = *base + 2 * page;
  if (!valid_physical(entry) || !valid_physical(entry + 1)) {
    out.trap = detail::memory_violation(addr, "page table entry outside memory");
    return out;
  }
  const Word& flags = memory.read(entry + 1);
  if (flags.size() != 4) {
    out.trap = detail::memory_violation(addr, "malformed page table entry");
    return out;
  }
  if (flags[0] != '1') {
    auto t = Trap::exception(Cause::page_fault);
    t.page = page;
    out.trap = std::move(t);
    return out;
  }
  if (access == Access::write && flags[1] != '1') {
    out.trap = detail::memory_violation(addr, "page not writable");
    return out;
  }
  const auto frame = word_as_integer(memory.read(entry));
  if (!frame || *frame < 0 || *frame >= kPageCount) {
    out.trap = detail::memory_violation(addr, "bad physical page in page table");
    return out;
  }
  out.physical = *frame * kPageSize + addr % kPageSize;
  if (!valid_physical(out.physical)) {
    out.trap = detail::memory_violation(addr);
    return out;
  }
  Word updated = flags;
  updated[2] = '1';
  if (access == Access::write) updated[3] = '1';
  if (updated != flags) out.flag_update = std::pair{entry + 1, std::move(updated)};
  return out;
}

/// Translates and, on success, records Referenced (and Dirty on writes).
inline Translation translate(Integer addr, Access access, Mode mode, const RegisterFile& regs, Memory& memory) {
  auto t = lookup(addr, access, mode, regs, memory);
  if (t && t.flag_update) memory.write(t.flag_update->first, t.flag_update->second);
  return t;
}

/// "*" followed by the decimal sum of the character codes, written twice.
[[nodiscard]] inline Word encrypt_word(const Word& w) {
  Integer sum = 0;
  for (unsigned char c : w) sum += c;
  const auto digits = std::to_string(sum);
  return "*" + digits + digits;
}

// ---------------------------------------------------------------------------
// Machine
// ---------------------------------------------------------------------------

struct StepResult {
  enum class Kind : std::uint8_t { running, halted, fatal };
  Kind kind = Kind::running;
  bool executed = false;                 // at least one instruction ran (a tick happened)
  std::optional<int> breakpoint_core;    // a core executed BRKP this step
  std::optional<FatalFault> fault;
};

class Machine {
 public:
  explicit Machine(DeviceConfig config = {}, int core_count = 1, DiskImage disk = {}, Console console = {})
      : devices_(config), disk_(std::move(disk)), console_(std::move(console)) {
    state_.core_count = core_count;
  }

  /// Firmware reset: block 0 to page 1, IP = 512, kernel mode on core 0,
  /// every other register and memory word empty.
  void boot() {
    const int cores = state_.core_count;
    state_ = MachineState{};
    state_.core_count = cores;
    std::vector<Word> block0(disk_.block(0).begin(), disk_.block(0).end());
    state_.memory.store_page(kBootAddress / kPageSize, block0);
    state_.memory.clear_write_log();
    auto& core = state_.cores[0];
    core.started = true;
    core.mode = Mode::kernel;
    core.regs[Reg::IP] = integer_word(kBootAddress);
    devices_ = DeviceState(devices_.config);
    ticks_ = 0;
  }

  /// One step: each started, running core delivers a pending interrupt or
  /// executes one instruction (core 0 first), then devices tick once if any
  /// instruction ran.
  StepResult step() {
    StepResult result;
    state_.memory.clear_write_log();
    if (state_.cores[0].halted) {
      result.kind = StepResult::Kind::halted;
      return result;
    }
    for (int c = 0; c < state_.core_count; ++c) {
      auto outcome = step_core(c);
      if (outcome.fault) {
        if (outcome.executed || result.executed) ++ticks_;
        result.kind = StepResult::Kind::fatal;
        result.fault = std::move(outcome.fault);
        return result;
      }
      result.executed = result.executed || outcome.executed;
      if (outcome.breakpoint && !result.breakpoint_core) result.breakpoint_core = c;
    }
    if (result.executed) {
      ++ticks_;
      auto raised = tick(devices_, bus());
      if (trace_)
        for (auto k : raised) *trace_ << "# " << ticks_ << " irq " << trap_kind_name(k) << '\n';
    }
    if (state_.cores[0].halted) result.kind = StepResult::Kind::halted;
    return result;
  }

  [[nodiscard]] MachineState& state() noexcept { return state_; }
  [[nodiscard]] const MachineState& state() const noexcept { return state_; }
  [[nodiscard]] CoreState& core(int c = 0) { return state_.cores.at(static_cast<std::size_t>(c)); }
  [[nodiscard]] const CoreState& core(int c = 0) const { return state_.cores.at(static_cast<std::size_t>(c)); }
  [[nodiscard]] Memory& memory() noexcept { return state_.memory; }
  [[nodiscard]] const Memory& memory() const noexcept { return state_.memory; }
  [[nodiscard]] DeviceState& devices() noexcept { return devices_; }
  [[nodiscard]] const DeviceState& devices() const noexcept { return devices_; }
  [[nodiscard]] DiskImage& disk() noexcept { return disk_; }
  [[nodiscard]] const DiskImage& disk() const noexcept { return disk_; }
  [[nodiscard]] Console& console() noexcept { return console_; }
  [[nodiscard]] const Console& console() const noexcept { return console_; }
  [[nodiscard]] Integer ticks() const noexcept { return ticks_; }

  /// Per-instruction trace: "<tick> <core> <K|U> <IP> <instruction>", plus
  /// "# ..." lines for interrupts raised and traps delivered.
  void set_trace(std::ostream* out) noexcept { trace_ = out; }

  /// Delivers an interrupt or software trap on a user-mode core: pushes
  /// `resume` through user translation, enters kernel mode and jumps to the
  /// vector. A fault while pushing is fatal.
  std::optional<FatalFault> deliver_trap(int c, const Trap& t, Integer resume) {
    auto& core = this->core(c);
    if (t.kind == TrapKind::exception) return raise_exception(c, core.regs[Reg::IP], t);
    if (core.mode != Mode::user)
      return FatalFault{c, core.regs[Reg::IP], std::nullopt, "trap delivered in kernel mode"};
    const auto sp = word_as_integer(core.regs[Reg::SP]);
    if (!sp) return FatalFault{c, core.regs[Reg::IP], Cause::illegal_memory_access, "SP not numeric during trap delivery"};
    auto where = translate(*sp + 1, Access::write, Mode::user, core.regs, state_.memory);
    if (!where)
      return FatalFault{c, core.regs[Reg::IP], where.trap->cause, "push fault during trap delivery: " + where.trap->describe()};
    state_.memory.write(where.physical, integer_word(resume));
    core.regs[Reg::SP] = integer_word(*sp + 1);
    core.mode = Mode::kernel;
    core.regs[Reg::IP] = integer_word(trap_vector(t));
    core.last_trap = t;
    if (trace_) *trace_ << "# " << ticks_ + 1 << ' ' << c << " trap " << t.describe() << '\n';
    return std::nullopt;
  }

  /// Exception delivery: EIP/EC/EPN/EMA, kernel mode, IP = 1024. Fatal when
  /// the core is already in kernel mode.
  std::optional<FatalFault> raise_exception(int c, const Word& faulting_ip, const Trap& t) {
    auto& core = this->core(c);
    if (core.mode == Mode::kernel) {
      core.last_trap = t;
      std::string message = "exception in kernel mode";
      if (!t.detail.empty()) message += ": " + t.detail;
      if (t.address) message += ", address " + std::to_string(*t.address);
      if (t.page) message += ", page " + std::to_string(*t.page);
      return FatalFault{c, faulting_ip, t.cause, message};
    }
    core.regs[Reg::EIP] = faulting_ip;
    core.regs[Reg::EC] = integer_word(static_cast<Integer>(t.cause));
    if (t.page) core.regs[Reg::EPN] = integer_word(*t.page);
    if (t.address) core.regs[Reg::EMA] = integer_word(*t.address);
    core.mode = Mode::kernel;
    core.regs[Reg::IP] = integer_word(kExceptionVector);
    core.last_trap = t;
    if (trace_) *trace_ << "# " << ticks_ + 1 << ' ' << c << " trap exception " << t.describe() << '\n';
    return std::nullopt;
  }

 private:
  struct CoreOutcome {
    bool executed = false;
    bool breakpoint = false;
    std::optional<FatalFault> fault;
  };

  // Thrown inside instruction execution; caught by step_core.
  struct Raised {
    Trap trap;
  };
  struct Fatal {
    std::string message;
  };

  enum class Flow : std::uint8_t { next, jumped, breakpoint, halt };

  DeviceBus bus() { return DeviceBus{state_.memory, disk_, state_.cores[0].regs[Reg::P0], console_}; }

  CoreOutcome step_core(int c) {
    CoreOutcome out;
    auto& core = this->core(c);
    if (!core.started || core.halted) return out;

    if (c == 0 && core.mode == Mode::user && devices_.pending.any()) {
      const auto kind = *devices_.pending.take();
      const auto resume = word_as_integer(core.regs[Reg::IP]).value_or(0);
      out.fault = deliver_trap(c, Trap::interrupt(kind), resume);
      return out;
    }

    out.executed = true;
    const Word ip_word = core.regs[Reg::IP];
    const Mode mode_before = core.mode;
    try {
      const auto ip = word_as_integer(ip_word);
      if (!ip) throw Raised{Trap::exception(Cause::illegal_instruction, "IP not numeric")};
      auto where = translate(*ip, Access::fetch, core.mode, core.regs, state_.memory);
      if (!where) {
        trace_line(c, mode_before, ip_word, "<fetch fault>");
        throw Raised{*where.trap};
      }
      const Word text = state_.memory.read(where.physical);
      trace_line(c, mode_before, ip_word, text);
      auto instr = decode(text);
      if (!instr) throw Raised{Trap::exception(Cause::illegal_instruction, "cannot decode \"" + text + "\"")};
      if (is_privileged(instr->opcode) && core.mode == Mode::user)
        throw Raised{Trap::exception(Cause::illegal_instruction, "privileged instruction in user mode")};
      const auto flow = execute(c, *instr, *ip);
      if (flow == Flow::next || flow == Flow::breakpoint) core.regs[Reg::IP] = integer_word(*ip + 2);
      if (flow == Flow::breakpoint) out.breakpoint = true;
      if (flow == Flow::halt) core.halted = true;
    } catch (const Raised& r) {
      out.fault = raise_exception(c, ip_word, r.trap);
    } catch (const Fatal& f) {
      out.fault = FatalFault{c, ip_word, std::nullopt, f.message};
    }
    return out;
  }

  void trace_line(int c, Mode m, const Word& ip, const Word& text) {
    if (trace_) *trace_ << ticks_ + 1 << ' ' << c << ' ' << (m == Mode::kernel ? 'K' : 'U') << ' ' << ip << ' ' << text << '\n';
  }

  // -- operand access -------------------------------------------------------

  static void illegal(std::string why) { throw Raised{Trap::exception(Cause::illegal_instruction, std::move(why))}; }

  const Word& read_register(const CoreState& core, Reg r) {
    if (core.mode == Mode::user && !user_accessible(r))
      illegal("register " + std::string(register_name(r)) + " not accessible in user mode");
    return core.regs[r];
  }

  void write_register(CoreState& core, Reg r, Word w) {
    if (r == Reg::IP) illegal("IP is not writable");
    if (core.mode == Mode::user && !user_accessible(r))
      illegal("register " + std::string(register_name(r)) + " not accessible in user mode");
    core.regs[r] = std::move(w);
  }

  Integer numeric(const Word& w, std::string_view what) {
    auto v = word_as_integer(w);
    if (!v) illegal(std::string(what) + " is not numeric: \"" + w + "\"");
    return *v;
  }

  Address memory_address(CoreState& core, const MemoryOperand& m, Access access) {
    Integer logical = 0;
    if (const auto* r = std::get_if<Reg>(&m.base)) logical = numeric(read_register(core, *r), "address");
    else logical = std::get<Integer>(m.base);
    auto where = translate(logical, access, core.mode, core.regs, state_.memory);
    if (!where) throw Raised{*where.trap};
    return where.physical;
  }

  Word read_operand(CoreState& core, const Operand& op) {
    if (const auto* r = std::get_if<RegisterOperand>(&op)) return read_register(core, r->reg);
    if (const auto* i = std::get_if<IntegerOperand>(&op)) return integer_word(i->value);
    if (const auto* s = std::get_if<StringOperand>(&op)) return s->text;
    return state_.memory.read(memory_address(core, std::get<MemoryOperand>(op), Access::read));
  }

  void write_operand(CoreState& core, const Operand& op, Word w) {
    if (const auto* r = std::get_if<RegisterOperand>(&op)) return write_register(core, r->reg, std::move(w));
    const auto phys = memory_address(core, std::get<MemoryOperand>(op), Access::write);
    state_.memory.write(phys, std::move(w));
  }

  Integer int_operand(CoreState& core, const Operand& op) { return numeric(read_operand(core, op), "operand"); }

  void push(CoreState& core, Word w) {
    const auto sp = numeric(read_register(core, Reg::SP), "SP");
    auto where = translate(sp + 1, Access::write, core.mode, core.regs, state_.memory);
    if (!where) throw Raised{*where.trap};
    state_.memory.write(where.physical, std::move(w));
    core.regs[Reg::SP] = integer_word(sp + 1);
  }

  Word pop(CoreState& core, Mode via) {
    const auto sp = numeric(read_register(core, Reg::SP), "SP");
    auto where = translate(sp, Access::read, via, core.regs, state_.memory);
    if (!where) throw Raised{*where.trap};
    Word w = state_.memory.read(where.physical);
    core.regs[Reg::SP] = integer_word(sp - 1);
    return w;
  }

  static void overflow_check(bool overflow) {
    if (overflow) throw Raised{Trap::exception(Cause::arithmetic, "integer overflow")};
  }

  static Integer arithmetic(Opcode op, Integer a, Integer b) {
    Integer r = 0;
    switch (op) {
      case Opcode::ADD: overflow_check(__builtin_add_overflow(a, b, &r)); return r;
      case Opcode::SUB: overflow_check(__builtin_sub_overflow(a, b, &r)); return r;
      case Opcode::MUL: overflow_check(__builtin_mul_overflow(a, b, &r)); return r;
      case Opcode::DIV:
      case Opcode::MOD:
        if (b == 0) throw Raised{Trap::exception(Cause::arithmetic, "division by zero")};
        if (a == INT64_MIN && b == -1) throw Raised{Trap::exception(Cause::arithmetic, "integer overflow")};
        return op == Opcode::DIV ? a / b : a % b;
      default:
        return 0;
    }
  }

  bool compare(Opcode op, const Word& lhs, const Word& rhs) {
    const auto a = word_as_integer(lhs);
    const auto b = word_as_integer(rhs);
    if (op == Opcode::EQ || op == Opcode::NE) {
      const bool equal = (a && b) ? *a == *b : lhs == rhs;
      return op == Opcode::EQ ? equal : !equal;
    }
    if (!a || !b) illegal("ordering comparison on non-numeric word");
    switch (op) {
      case Opcode::LT: return *a < *b;
      case Opcode::GT: return *a > *b;
      case Opcode::LE: return *a <= *b;
      case Opcode::GE: return *a >= *b;
      default: return false;
    }
  }

  void jump(CoreState& core, Integer target) { core.regs[Reg::IP] = integer_word(target); }

  Reg reg_of(const Operand& op) { return std::get<RegisterOperand>(op).reg; }

  // -- semantics ------------------------------------------------------------

  Flow execute(int c, const Instruction& instr, Integer ip) {
    auto& core = this->core(c);
    const auto& ops = instr.operands;
    switch (instr.opcode) {
      case Opcode::MOV: {
        auto value = read_operand(core, ops[1]);
        write_operand(core, ops[0], std::move(value));
        return Flow::next;
      }
      case Opcode::ADD: case Opcode::SUB: case Opcode::MUL: case Opcode::DIV: case Opcode::MOD: {
        const auto dst = reg_of(ops[0]);
        const auto a = numeric(read_register(core, dst), "operand");
        const auto b = int_operand(core, ops[1]);
        write_register(core, dst, integer_word(arithmetic(instr.opcode, a, b)));
        return Flow::next;
      }
      case Opcode::INR: case Opcode::DCR: {
        const auto dst = reg_of(ops[0]);
        const auto a = numeric(read_register(core, dst), "operand");
        const auto r = arithmetic(instr.opcode == Opcode::INR ? Opcode::ADD : Opcode::SUB, a, 1);
        write_register(core, dst, integer_word(r));
        return Flow::next;
      }
      case Opcode::LT: case Opcode::GT: case Opcode::EQ: case Opcode::NE: case Opcode::GE: case Opcode::LE: {
        const auto dst = reg_of(ops[0]);
        const Word lhs = read_register(core, dst);
        const Word rhs = read_operand(core, ops[1]);
        write_register(core, dst, compare(instr.opcode, lhs, rhs) ? "1" : "0");
        return Flow::next;
      }
      case Opcode::JZ: case Opcode::JNZ: {
        const auto v = numeric(read_register(core, reg_of(ops[0])), "condition");
        const auto target = int_operand(core, ops[1]);
        if ((v == 0) == (instr.opcode == Opcode::JZ)) {
          jump(core, target);
          return Flow::jumped;
        }
        return Flow::next;
      }
      case Opcode::JMP:
        jump(core, int_operand(core, ops[0]));
        return Flow::jumped;
      case Opcode::PUSH:
        push(core, read_operand(core, ops[0]));
        return Flow::next;
      case Opcode::POP: {
        const auto dst = reg_of(ops[0]);
        if (dst == Reg::IP) illegal("IP is not writable");
        if (core.mode == Mode::user && !user_accessible(dst)) illegal("register not accessible in user mode");
        auto w = pop(core, core.mode);
        core.regs[dst] = std::move(w);
        return Flow::next;
      }
      case Opcode::CALL: {
        const auto target = int_operand(core, ops[0]);
        push(core, integer_word(ip + 2));
        jump(core, target);
        return Flow::jumped;
      }
      case Opcode::RET:
        core.regs[Reg::IP] = pop(core, core.mode);
        return Flow::jumped;
      case Opcode::BRKP:
        return Flow::breakpoint;
      case Opcode::INT: {
        if (core.mode != Mode::user) illegal("INT issued in kernel mode");
        const auto n = static_cast<int>(std::get<IntegerOperand>(ops[0]).value);
        if (auto f = deliver_trap(c, Trap::interrupt(TrapKind::software_int, n), ip + 2)) throw Fatal{f->message};
        return Flow::jumped;
      }
      case Opcode::IRET: {
        core.regs[Reg::IP] = pop(core, Mode::user);
        core.mode = Mode::user;
        return Flow::jumped;
      }
      case Opcode::HALT:
        return Flow::halt;
      case Opcode::LOAD: case Opcode::LOADI: case Opcode::STORE: case Opcode::STOREI: {
        const bool to_memory = instr.opcode == Opcode::LOAD || instr.opcode == Opcode::LOADI;
        const bool immediate = instr.opcode == Opcode::LOADI || instr.opcode == Opcode::STOREI;
        const auto first = int_operand(core, ops[0]);
        const auto second = int_operand(core, ops[1]);
        const auto page = to_memory ? first : second;
        const auto block = to_memory ? second : first;
        if (auto t = disk_request(devices_, to_memory ? DiskOpKind::load : DiskOpKind::store, page, block,
                                  immediate, bus()))
          throw Raised{*t};
        return Flow::next;
      }
      case Opcode::IN:
        if (auto t = console_input_async(devices_, bus())) throw Raised{*t};
        return Flow::next;
      case Opcode::INI: {
        const auto dst = reg_of(ops[0]);
        if (dst == Reg::IP) illegal("IP is not writable");
        auto line = console_input_sync(console_);
        if (!line) throw Fatal{"console input exhausted on INI"};
        write_register(core, dst, std::move(*line));
        return Flow::next;
      }
      case Opcode::OUT:
        console_output(devices_, read_register(core, reg_of(ops[0])), false, console_);
        return Flow::next;
      case Opcode::PRINT:
        console_output(devices_, read_operand(core, ops[0]), true, console_);
        return Flow::next;
      case Opcode::ENCRYPT: {
        const auto dst = reg_of(ops[0]);
        write_register(core, dst, encrypt_word(read_register(core, dst)));
        return Flow::next;
      }
      case Opcode::BACKUP:
        push(core, core.regs[Reg::BP]);
        for (std::size_t i = 0; i < kGeneralRegisters; ++i) push(core, core.regs[general_register(i)]);
        return Flow::next;
      case Opcode::RESTORE: {
        for (std::size_t i = kGeneralRegisters; i-- > 0;) core.regs[general_register(i)] = pop(core, core.mode);
        core.regs[Reg::BP] = pop(core, core.mode);
        return Flow::next;
      }
      case Opcode::TSL: {
        if (state_.core_count < 2) illegal("TSL requires a two-core machine");
        const auto dst = reg_of(ops[0]);
        if (dst == Reg::IP) illegal("IP is not writable");
        const auto phys = memory_address(core, std::get<MemoryOperand>(ops[1]), Access::write);
        core.regs[dst] = state_.memory.read(phys);
        state_.memory.write(phys, "1");
        return Flow::next;
      }
      case Opcode::START: {
        if (state_.core_count < 2) illegal("START requires a two-core machine");
        if (c != 0) illegal("START issued on the secondary core");
        const auto addr = int_operand(core, ops[0]);
        if (!valid_physical(addr)) illegal("START address outside memory");
        auto& second = state_.cores[1];
        if (!second.started) {
          second = CoreState{};
          second.started = true;
          second.mode = Mode::kernel;
          second.regs[Reg::IP] = integer_word(addr);
        }
        return Flow::next;
      }
    }
    illegal("unknown opcode");
    return Flow::next;
  }

  MachineState state_;
  DeviceState devices_;
  DiskImage disk_;
  Console console_;
  Integer ticks_ = 0;
  std::ostream* trace_ = nullptr;
};

}  // namespace xsm
