#pragma once

// Shared helpers for the unit and acceptance suites.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "xsm/machine.hpp"
#include "xsm/xfs.hpp"

namespace xsm::test {

inline DiskImage boot_image(const std::vector<std::string>& code) {
  auto disk = xfs::FileSystem::format();
  xfs::FileSystem(disk).load_boot(code);
  return disk;
}

inline Machine booted(const std::vector<std::string>& code, DeviceConfig config = {}, int cores = 1,
                      std::vector<std::string> input = {}) {
  Machine m(config, cores, boot_image(code), Console(std::move(input)));
  m.boot();
  return m;
}

struct RunOutcome {
  StepResult::Kind kind = StepResult::Kind::running;
  Integer steps = 0;
  std::optional<FatalFault> fault;
};

inline RunOutcome run_until_stop(Machine& m, Integer max_steps = 1'000'000) {
  RunOutcome out;
  for (; out.steps < max_steps; ++out.steps) {
    auto r = m.step();
    if (r.kind != StepResult::Kind::running) {
      out.kind = r.kind;
      out.fault = r.fault;
      ++out.steps;
      return out;
    }
  }
  return out;
}

/// Writes a code sequence at a physical address, two words per instruction.
inline void place_code(Memory& memory, Address at, const std::vector<std::string>& code) {
  for (std::size_t i = 0; i < code.size(); ++i) memory.write(at + 2 * static_cast<Address>(i), code[i]);
}

// A user address space used throughout the tests: logical pages 0..9 map
// to physical pages 20..29, all valid and writable, with the page table at
// physical 28672 (page 56).
inline constexpr Address kTestPageTable = 28672;
inline constexpr Integer kTestFirstFrame = 20;
inline constexpr Integer kTestPages = 10;

inline void map_user_space(Machine& m, int core = 0) {
  for (Integer p = 0; p < kTestPages; ++p) {
    m.memory().write(kTestPageTable + 2 * p, integer_word(kTestFirstFrame + p));
    m.memory().write(kTestPageTable + 2 * p + 1, "1100");
  }
  m.core(core).regs[Reg::PTBR] = integer_word(kTestPageTable);
  m.core(core).regs[Reg::PTLR] = integer_word(kTestPages);
}

[[nodiscard]] constexpr Address user_physical(Integer logical) {
  return (kTestFirstFrame + logical / kPageSize) * kPageSize + logical % kPageSize;
}

/// Puts core 0 in user mode at `ip` with the test address space mapped.
inline void enter_user(Machine& m, Integer ip, Integer sp = 4096) {
  map_user_space(m);
  auto& core = m.core(0);
  core.mode = Mode::user;
  core.regs[Reg::IP] = integer_word(ip);
  core.regs[Reg::SP] = integer_word(sp);
}

/// Unique scratch directory under the system temp dir, removed on exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("xsm-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Independent translation oracle: recomputes the page lookup directly from
// raw memory words without going through the simulator's code path.
// ---------------------------------------------------------------------------

struct OracleResult {
  bool ok = false;
  Cause cause = Cause::illegal_memory_access;
  Integer physical = 0;
};

inline OracleResult oracle_translate(Integer addr, bool write, const std::string& ptbr, const std::string& ptlr,
                                     const std::vector<Word>& cells) {
  auto num = [](const std::string& s, long long& v) {
    if (s.empty()) return false;
    std::size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    for (std::size_t k = i; k < s.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    try {
      v = std::stoll(s);
    } catch (...) {
      return false;
    }
    return true;
  };
  long long base = 0, len = 0;
  OracleResult r;
  if (addr < 0 || !num(ptbr, base) || !num(ptlr, len)) return r;
  // Linear scan over the table rather than direct indexing.
  for (long long page = 0; page < len; ++page) {
    if (addr < page * 512 || addr >= (page + 1) * 512) continue;
    const long long e = base + 2 * page;
    if (e < 0 || e + 1 >= 65536) return r;
    const std::string& flags = cells[static_cast<std::size_t>(e + 1)];
    if (flags.size() != 4) return r;
    if (flags[0] != '1') {
      r.cause = Cause::page_fault;
      return r;
    }
    if (write && flags[1] != '1') return r;
    long long frame = 0;
    if (!num(cells[static_cast<std::size_t>(e)], frame) || frame < 0 || frame > 127) return r;
    r.ok = true;
    r.physical = frame * 512 + (addr - page * 512);
    return r;
  }
  return r;
}

}  // namespace xsm::test
