#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xsm/spl/codegen.hpp"
#include "xsm/spl/lexer.hpp"
#include "xsm/spl/parser.hpp"

namespace xsm::spl {

inline constexpr Address kDefaultBase = 512;

struct CompileReport {
  std::vector<std::string> instructions;
  Integer instruction_count = 0;
  Integer footprint = 0;  // words occupied in memory, two per instruction

  [[nodiscard]] std::string assembly() const {
    std::string text;
    for (const auto& i : instructions) {
      text += i;
      text += '\n';
    }
    return text;
  }
};

[[nodiscard]] inline CompileReport compile(std::string_view source, Address base = kDefaultBase) {
  CompileReport report;
  report.instructions = generate(parse(tokenize(source)), base);
  report.instruction_count = static_cast<Integer>(report.instructions.size());
  report.footprint = 2 * report.instruction_count;
  return report;
}

/// Compiles `path` and writes the assembly to `out_path`. Errors are
/// rethrown as xsm::Error prefixed with "<path>:<line>:".
inline CompileReport compile_file(const std::filesystem::path& path, Address base,
                                  const std::filesystem::path& out_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot read source");
  std::stringstream buffer;
  buffer << in.rdbuf();
  CompileReport report;
  try {
    report = compile(buffer.str(), base);
  } catch (const CompileError& e) {
    const auto where = e.line() > 0 ? path.string() + ":" + std::to_string(e.line()) : path.string();
    throw Error(where + ": " + e.message());
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(out_path.string() + ": cannot write output");
  out << report.assembly();
  if (!out) throw Error(out_path.string() + ": write failed");
  return report;
}

}  // namespace xsm::spl
