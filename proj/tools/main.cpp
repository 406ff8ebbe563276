#include <algorithm>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "run_config.hpp"

int main(int argc, char** argv) {
  using namespace nonloc::cli;
  CLI::App app{"Non-local perimeters, seminorms and isoperimetric experiments on grids"};
  std::string command, config_path, output;
  app.add_option("command", command, "one of: certify integral seminorm perimeter energy curvature closedform "
                                     "extend ballcurve optimize counterexample poincare sobolev-check rel-iso probe");
  app.add_option("-c,--config", config_path, "key/value run configuration")->required();
  app.add_option("-o,--output", output, "output directory (overrides `output`)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = RunConfig::load(config_path);
    cfg.output_override = output;
    std::string from_file = cfg.command();
    if (command.empty()) command = from_file;
    if (command.empty()) {
      std::cerr << "error: no command given on the command line or in the config\n";
      return 1;
    }
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
      std::cerr << "error: unknown command '" << command << "'\n";
      return 1;
    }
    if (!from_file.empty() && from_file != command) {
      std::cerr << "error: command '" << command << "' conflicts with config command '" << from_file << "'\n";
      return 1;
    }
    Outcome o = run_command(command, cfg);
    std::cout << o.summary << '\n';
    return o.code;
  } catch (const nonloc::ParseError& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
