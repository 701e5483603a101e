#include <sys/wait.h>

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nexsm_fixture.hpp"
#include "spl_gen.hpp"
#include "support.hpp"
#include "xsm/machine.hpp"
#include "xsm/spl/compiler.hpp"
#include "xsm/xfs.hpp"

using namespace xsm;
using namespace xsm::test;

namespace {

namespace fs = std::filesystem;

const fs::path kFixtures = XSM_FIXTURE_DIR;

struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

// Runs a shell command and returns its exit status.
int sh(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

int xfs_cli(const std::string& args, const fs::path& out) {
  return sh(quote(XFS_BIN) + " " + args + " > " + quote(out) + " 2>&1");
}

struct XsmRun {
  int code = -1;
  std::string out;
  std::string err;
};

XsmRun xsm_cli(const TempDir& dir, const std::string& args, const std::string& stdin_text = "") {
  write_text(dir / "stdin.txt", stdin_text);
  XsmRun r;
  r.code = sh(quote(XSM_BIN) + " " + args + " < " + quote(dir / "stdin.txt") + " > " + quote(dir / "stdout.txt") +
              " 2> " + quote(dir / "stderr.txt"));
  r.out = read_text(dir / "stdout.txt");
  r.err = read_text(dir / "stderr.txt");
  return r;
}

fs::path image_with_boot(const TempDir& dir, const fs::path& boot, const std::string& name = "disk.img") {
  const auto img = dir / name;
  require(xfs_cli("init " + quote(img), dir / "xfs.txt") == 0, "xfs init failed");
  require(xfs_cli("load --boot " + quote(img) + " " + quote(boot), dir / "xfs.txt") == 0,
          "xfs load --boot failed: " + read_text(dir / "xfs.txt"));
  return img;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

struct TraceLine {
  bool event = false;  // "# ..." line
  Integer tick = 0;
  std::string mode;
  std::string text;  // instruction, or the event body after the tick
};

std::vector<TraceLine> parse_trace(const fs::path& path) {
  std::vector<TraceLine> out;
  for (const auto& line : lines_of(read_text(path))) {
    TraceLine t;
    std::istringstream in(line);
    if (line.rfind("# ", 0) == 0) {
      std::string hash;
      in >> hash >> t.tick;
      t.event = true;
    } else {
      int core = 0;
      std::string ip;
      in >> t.tick >> core >> t.mode >> ip;
    }
    std::getline(in >> std::ws, t.text);
    out.push_back(t);
  }
  return out;
}

std::string counter_asm(const TempDir& dir) {
  const auto out = dir / "counter.asm";
  require(sh(quote(SPL_BIN) + " " + quote(kFixtures / "counter.spl") + " --base 512 -o " + quote(out) +
             " > /dev/null") == 0,
          "spl failed on counter.spl");
  return out.string();
}

// ---------------------------------------------------------------------------

void boot_contract() {
  TempDir dir;
  const auto img = image_with_boot(dir, kFixtures / "hello.asm");
  const auto r = xsm_cli(dir, "--disk " + quote(img));
  require(r.code == 0, "exit code " + std::to_string(r.code));
  require(r.out == "hello world\n", "stdout was '" + r.out + "'");
}

void counter_listing() {
  TempDir dir;
  const auto assembled = counter_asm(dir);
  require(read_text(assembled) == read_text(kFixtures / "counter.asm"), "spl output differs from counter.asm");
  const auto img = image_with_boot(dir, assembled);
  const auto r = xsm_cli(dir, "--disk " + quote(img) + " --debug --debug-script " + quote(kFixtures / "counter.dbg"));
  require(r.code == 0, "exit code " + std::to_string(r.code));
  require(r.out.find("(db) reg R0\nR0: 11\n") != std::string::npos, "reg R0 did not print 11:\n" + r.out);
  require(r.err == "xsm: halt after 83 ticks\n", "stderr was '" + r.err + "'");
}

void debugger_semantics() {
  TempDir dir;
  const auto img = image_with_boot(dir, counter_asm(dir));
  const auto script = " --debug-script " + quote(kFixtures / "counter.dbg");
  const auto with = xsm_cli(dir, "--disk " + quote(img) + " --debug" + script);
  require(with.code == 0, "exit code with --debug " + std::to_string(with.code));
  require(with.out == read_text(kFixtures / "counter_debug.out"), "transcript with --debug:\n" + with.out);

  const auto without = xsm_cli(dir, "--disk " + quote(img) + script);
  require(without.code == 0, "exit code without --debug " + std::to_string(without.code));
  require(without.out == read_text(kFixtures / "counter_nodebug.out"), "transcript without --debug:\n" + without.out);
  require(without.err == with.err, "tick counts differ: " + without.err + " vs " + with.err);

  const auto typed = xsm_cli(dir, "--disk " + quote(img) + " --debug", "reg R0\n\nc\n");
  require(typed.code == 0, "exit code interactive " + std::to_string(typed.code));
  require(typed.out == read_text(kFixtures / "counter_interactive.out"), "interactive transcript:\n" + typed.out);
}

void translation_oracle() {
  std::mt19937_64 rng(20240611);
  const std::vector<std::string> flags = {"1100", "1000", "0100", "0000", "1111", "1010", "110", "11000", "", "x100"};
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    RegisterFile regs;
    Memory memory;
    const Integer base = static_cast<Integer>(rng() % 65600);
    const Integer len = static_cast<Integer>(rng() % 24);
    regs[Reg::PTBR] = rng() % 50 == 0 ? "bad" : integer_word(base);
    regs[Reg::PTLR] = integer_word(len);
    for (Integer p = 0; p < len; ++p) {
      const Integer e = base + 2 * p;
      if (e + 1 >= kMemoryWords) break;
      const auto pick = rng() % 20;
      memory.write(e, pick == 0 ? "200" : pick == 1 ? "q" : integer_word(static_cast<Integer>(rng() % 128)));
      memory.write(e + 1, flags[rng() % flags.size()]);
    }
    const Integer addr = static_cast<Integer>(rng() % 13000) - 100;
    const bool write = rng() % 2 == 0;
    const auto want = oracle_translate(addr, write, regs[Reg::PTBR], regs[Reg::PTLR], memory.cells());
    const auto got = translate(addr, write ? Access::write : Access::read, Mode::user, regs, memory);
    bool same = static_cast<bool>(got) == want.ok;
    if (same && want.ok) {
      const auto f = memory.read(base + 2 * (addr / kPageSize) + 1);
      same = got.physical == want.physical && f[2] == '1' && (!write || f[3] == '1');
    }
    if (same && !want.ok) same = got.trap->cause == want.cause;
    mismatches += !same;
  }
  require(mismatches == 0, std::to_string(mismatches) + " mismatches");
}

void spl_semantics() {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    ProgramGenerator gen(seed * 7919 + 17);
    const auto program = gen.program(seed % 5 != 0);
    const auto diff = compare_with_reference(program);
    require(diff.empty(), "seed " + std::to_string(seed) + ": " + diff);
    const auto source = render(program);
    require(spl::compile(source, 512).instructions == spl::compile(source, 512).instructions,
            "nondeterministic compile for seed " + std::to_string(seed));
    ++compared;
  }
  require(compared == 500, "ran " + std::to_string(compared) + " programs");

  TempDir dir;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto source = render(ProgramGenerator(seed + 1000).program());
    write_text(dir / "p.spl", source);
    for (const char* out : {"a.asm", "b.asm"})
      require(sh(quote(SPL_BIN) + " " + quote(dir / "p.spl") + " --base 1024 -o " + quote(dir / out) + " > /dev/null") ==
                  0,
              "spl failed");
    const auto a = read_text(dir / "a.asm");
    require(a == read_text(dir / "b.asm"), "spl output differs between runs");
    require(a == join_lines(spl::compile(source, 1024).instructions), "spl CLI output differs from the library");
  }
}

void xfs_conservation() {
  TempDir dir;
  const auto img = dir / "disk.img";
  const auto log = dir / "xfs.txt";
  require(xfs_cli("init " + quote(img), log) == 0, "xfs init failed");
  std::mt19937_64 rng(77);
  std::map<std::string, std::vector<std::string>> model;
  auto random_words = [&](std::size_t n) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = rng() % 10;
      words.push_back(r == 0 ? "" : r == 1 ? "two words" : std::to_string(rng() % 100000));
    }
    return words;
  };

  for (int op = 0; op < 200; ++op) {
    const auto r = rng() % 4;
    if (r < 2 || model.empty()) {
      const auto name = "f" + std::to_string(rng() % 25);
      const auto size = static_cast<std::size_t>(rng() % 2300);
      const auto words = random_words(size);
      xfs::write_words(dir / "in.txt", words);
      const int code = xfs_cli("load --data " + quote(img) + " " + quote(dir / "in.txt") + " --name " + name, log);
      const bool expect = !model.count(name) && size <= 2048;
      if (code == 0) {
        require(expect, "op " + std::to_string(op) + ": load of " + name + " (" + std::to_string(size) +
                            " words) should have failed");
        model[name] = words;
      } else {
        require(!expect,
                "op " + std::to_string(op) + ": load rejected: " + read_text(log));
      }
    } else if (r == 2) {
      auto it = model.begin();
      std::advance(it, static_cast<long>(rng() % model.size()));
      require(xfs_cli("rm " + quote(img) + " " + it->first, log) == 0, "rm failed: " + read_text(log));
      model.erase(it);
    } else {
      auto it = model.begin();
      std::advance(it, static_cast<long>(rng() % model.size()));
      require(xfs_cli("export " + quote(img) + " " + it->first + " " + quote(dir / "out.txt"), log) == 0,
              "export failed: " + read_text(log));
      require(xfs::host_lines(dir / "out.txt") == it->second, "export of " + it->first + " differs");
    }
    require(xfs_cli("fsck " + quote(img), log) == 0, "op " + std::to_string(op) + ": fsck: " + read_text(log));
    const auto expected = "clean: " + std::to_string(model.size()) + " files";
    require(read_text(log).rfind(expected, 0) == 0, "op " + std::to_string(op) + ": " + read_text(log));
  }

  for (std::size_t size = 0; size <= 2048; ++size) {
    auto disk = xfs::FileSystem::format();
    xfs::FileSystem files(disk);
    const auto words = random_words(size);
    files.load_file(words, xfs::FileType::data, "rt");
    xfs::write_words(dir / "rt.txt", files.read_file("rt"));
    require(xfs::host_lines(dir / "rt.txt") == words, "round trip failed at size " + std::to_string(size));
    require(files.fsck().empty(), "fsck failed at size " + std::to_string(size));
  }

  require(xfs_cli("init " + quote(img), log) == 0, "xfs init failed");
  for (std::size_t size : {0, 1, 511, 512, 513, 1536, 2047, 2048}) {
    const auto words = random_words(size);
    xfs::write_words(dir / "in.txt", words);
    require(xfs_cli("load --data " + quote(img) + " " + quote(dir / "in.txt") + " --name rt", log) == 0,
            "load failed at size " + std::to_string(size));
    require(xfs_cli("export " + quote(img) + " rt " + quote(dir / "out.txt"), log) == 0, "export failed");
    require(read_text(dir / "out.txt") == read_text(dir / "in.txt"), "CLI round trip failed at " + std::to_string(size));
    require(xfs_cli("rm " + quote(img) + " rt", log) == 0, "rm failed");
  }

  const auto before = read_text(img);
  xfs::write_words(dir / "big.txt", random_words(2049));
  require(xfs_cli("load --data " + quote(img) + " " + quote(dir / "big.txt") + " --name big", log) != 0,
          "2049-word file accepted");
  require(read_text(log).find("exceeds the maximum of 2048") != std::string::npos, "oversize message: " + read_text(log));
  require(read_text(img) == before, "rejected load changed the image");
}

void interrupt_discipline() {
  TempDir dir;
  const auto img = image_with_boot(dir, kFixtures / "kernel_timer.asm");
  const auto trace = dir / "trace.txt";
  const auto r = xsm_cli(dir, "--disk " + quote(img) + " --timer 10 --trace " + quote(trace));
  require(r.code == 0, "exit code " + std::to_string(r.code) + ": " + r.err);
  const auto lines = parse_trace(trace);

  std::optional<std::size_t> fire, delivery;
  int deliveries = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!lines[i].event) continue;
    if (!fire && lines[i].text == "irq timer") fire = i;
    if (lines[i].text.find(" trap ") != std::string::npos) {
      ++deliveries;
      delivery = i;
    }
  }
  require(fire.has_value(), "timer never fired");
  require(deliveries == 1, std::to_string(deliveries) + " trap deliveries");
  require(lines[*delivery].text.find("trap timer") != std::string::npos, "delivered " + lines[*delivery].text);

  int kernel_after_fire = 0;
  std::optional<std::size_t> last_instruction;
  for (std::size_t i = 0; i < *delivery; ++i) {
    if (lines[i].event) continue;
    require(lines[i].mode == "K", "user instruction before delivery: " + lines[i].text);
    if (i > *fire) ++kernel_after_fire;
    last_instruction = i;
  }
  require(kernel_after_fire >= 100, "only " + std::to_string(kernel_after_fire) + " kernel instructions after the fire");
  require(last_instruction && lines[*last_instruction].text == "IRET", "delivery not at the first user boundary");
  require(*delivery + 1 < lines.size() && lines[*delivery + 1].text == "HALT" && lines[*delivery + 1].mode == "K",
          "handler did not run after delivery");
}

void async_latency() {
  TempDir dir;
  const auto img = image_with_boot(dir, kFixtures / "disk_latency.asm");
  require(xfs_cli("load --data " + quote(img) + " " + quote(kFixtures / "disk_data.txt") + " --name data",
                  dir / "xfs.txt") == 0,
          "data load failed");
  require(read_text(dir / "xfs.txt").find("inode 1") != std::string::npos, "data file not first: " + read_text(dir / "xfs.txt"));
  for (Integer latency : {0, 1, 7, 25}) {
    const auto trace = dir / "trace.txt";
    const auto r = xsm_cli(dir, "--disk " + quote(img) + " --disk-latency " + std::to_string(latency) + " --trace " +
                                    quote(trace));
    const auto tag = "latency " + std::to_string(latency) + ": ";
    require(r.code == 0, tag + "exit code " + std::to_string(r.code));
    std::optional<Integer> loadi, load;
    std::vector<Integer> irqs;
    for (const auto& l : parse_trace(trace)) {
      if (!l.event && l.text.rfind("LOADI ", 0) == 0) loadi = l.tick;
      if (!l.event && l.text.rfind("LOAD ", 0) == 0) load = l.tick;
      if (l.event && l.text == "irq disk") irqs.push_back(l.tick);
    }
    require(loadi && load, tag + "LOAD/LOADI missing from trace");
    require(irqs.size() == 1, tag + std::to_string(irqs.size()) + " disk interrupts");
    require(irqs[0] == *load + latency, tag + "interrupt at " + std::to_string(irqs[0]) + ", LOAD at " +
                                            std::to_string(*load));
    const std::string before = latency == 0 ? "alpha" : "";
    require(r.out == "alpha\n" + before + "\nbeta\n", tag + "output '" + r.out + "'");
  }
}

std::string trace_of(Machine& m) {
  std::ostringstream trace;
  m.set_trace(&trace);
  run_until_stop(m);
  return trace.str();
}

void nexsm_tsl() {
  for (int run = 0; run < 50; ++run) {
    auto m = shared_increment(100, true, run % 13);
    const auto out = run_until_stop(m, 200000);
    require(out.kind == StepResult::Kind::halted, "locked run " + std::to_string(run) + " did not halt");
    require(m.memory().read(kCounter) == "200", "locked run " + std::to_string(run) + " total " + m.memory().read(kCounter));
  }
  auto lost = shared_increment(100, false);
  require(run_until_stop(lost, 200000).kind == StepResult::Kind::halted, "unlocked run did not halt");
  const auto total = word_as_integer(lost.memory().read(kCounter)).value_or(-1);
  require(total >= 100 && total < 200, "unlocked total " + std::to_string(total));

  for (const char* fixture : {"counter.asm", "hello.asm", "kernel_timer.asm"}) {
    const auto code = xfs::detail::assembly_lines(xfs::host_lines(kFixtures / fixture));
    auto one = booted(code, DeviceConfig{10, 3, 2}, 1);
    auto two = booted(code, DeviceConfig{10, 3, 2}, 2);
    require(trace_of(one) == trace_of(two), std::string("traces differ for ") + fixture);
    require(one.memory().cells() == two.memory().cells() && one.core(0).regs == two.core(0).regs,
            std::string("final state differs for ") + fixture);
    require(!two.core(1).started, "second core started");
  }
}

void determinism() {
  TempDir dir;
  const auto counter = counter_asm(dir);
  struct Fixture {
    fs::path boot;
    std::string flags;
  };
  const std::vector<Fixture> fixtures = {
      {kFixtures / "hello.asm", ""},
      {counter, "--debug --debug-script " + quote(kFixtures / "counter.dbg")},
      {kFixtures / "kernel_timer.asm", "--timer 10"},
      {kFixtures / "disk_latency.asm", "--disk-latency 7"},
  };
  for (const auto& f : fixtures) {
    const auto name = f.boot.filename().string();
    const auto img = image_with_boot(dir, f.boot, "base.img");
    require(xfs_cli("load --data " + quote(img) + " " + quote(kFixtures / "disk_data.txt") + " --name data",
                    dir / "xfs.txt") == 0,
            "data load failed");
    std::vector<std::size_t> hashes;
    std::vector<std::string> images, outputs;
    for (int i = 0; i < 2; ++i) {
      const auto run_img = dir / ("run" + std::to_string(i) + ".img");
      const auto trace = dir / ("trace" + std::to_string(i) + ".txt");
      fs::copy_file(img, run_img, fs::copy_options::overwrite_existing);
      const auto r = xsm_cli(dir, "--disk " + quote(run_img) + " " + f.flags + " --trace " + quote(trace));
      require(r.code == 0, name + ": exit code " + std::to_string(r.code));
      const auto text = read_text(trace);
      require(!text.empty(), name + ": empty trace");
      hashes.push_back(std::hash<std::string>{}(text));
      images.push_back(read_text(run_img));
      outputs.push_back(r.out + r.err);
    }
    require(hashes[0] == hashes[1], name + ": trace hashes differ");
    require(images[0] == images[1], name + ": final disk images differ");
    require(outputs[0] == outputs[1], name + ": console output differs");
  }

  auto a = shared_increment(50, false, 3);
  auto b = shared_increment(50, false, 3);
  require(trace_of(a) == trace_of(b), "dual-core traces differ");
  require(a.disk() == b.disk() && a.memory().cells() == b.memory().cells(), "dual-core final state differs");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"boot contract: hello world from the boot block", boot_contract},
      {"counter listing compiles, runs to HALT, R0 = 11", counter_listing},
      {"debugger stops at BRKP only with --debug", debugger_semantics},
      {"address translation matches the oracle over 1000 cases", translation_oracle},
      {"500 random SPL programs match the reference evaluator", spl_semantics},
      {"XFS conservation, round trip and size limit", xfs_conservation},
      {"timer held in kernel mode is delivered once at the user boundary", interrupt_discipline},
      {"LOAD completes after disk latency, LOADI immediately", async_latency},
      {"TSL spinlock totals, lost update and single-core equivalence", nexsm_tsl},
      {"repeated runs give identical traces and disk images", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string problem;
    try {
      criteria[i].second();
    } catch (const Failure& f) {
      problem = f.what;
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    const auto label = "criterion " + std::to_string(i + 1) + ": " + criteria[i].first;
    if (problem.empty()) {
      std::cout << "PASS " << label << '\n';
    } else {
      ++failures;
      std::cout << "FAIL " << label << "\n  " << problem << '\n';
    }
    std::cout.flush();
  }
  return failures == 0 ? 0 : 1;
}
