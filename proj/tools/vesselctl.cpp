#include <fstream>
#include <iostream>
#include <vector>

#include "vessel/cli.hpp"

int main(int argc, char** argv) {
  using namespace vessel::cli;
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    RunConfig cfg = parse_config(args);
    Report report = dispatch(cfg);
    const std::string rendered = emit_report(report, cfg.format);
    if (cfg.output_path.empty()) {
      std::cout << rendered;
    } else {
      std::ofstream out(cfg.output_path);
      if (!out) {
        std::cerr << "cannot open output file: " << cfg.output_path << "\n";
        return 2;
      }
      out << rendered;
    }
    return report.exit_code();
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
