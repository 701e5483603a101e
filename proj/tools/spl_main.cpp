#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "xsm/spl/compiler.hpp"

int main(int argc, char** argv) {
  CLI::App app{"SPL compiler: kernel source to XSM assembly", "spl"};
  std::string source;
  std::string output;
  xsm::Integer base = xsm::spl::kDefaultBase;
  app.add_option("source", source, "SPL source file")->required();
  app.add_option("-o,--output", output, "assembly output file")->required();
  app.add_option("--base", base, "load address (even)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const auto report = xsm::spl::compile_file(source, base, output);
    std::cout << report.instruction_count << " instructions, " << report.footprint << " words at base " << base
              << '\n';
  } catch (const xsm::Error& e) {
    std::cerr << "spl: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
