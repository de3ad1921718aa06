// Command-line front end: hyperham validate|simulate|diagnose --scenario FILE

#include "hyperham/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options {
  std::string scenario;
  std::string out;
  std::optional<double> tol;
  bool quiet = false;
  std::string trajectory;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
  cmd->add_option("--out", opt.out, "Output directory (overrides output.directory)");
  cmd->add_option("--tol", opt.tol, "Override every tolerance in the scenario");
  cmd->add_flag("--quiet", opt.quiet, "Only print errors");
}

int run(const std::string& command, const Options& opt) {
  using namespace hyperham;
  try {
    Scenario s = load_scenario(opt.scenario);
    if (!opt.out.empty()) s.output.directory = opt.out;
    if (opt.tol) s.override_tolerance(*opt.tol);

    CommandResult result;
    if (command == "validate") {
      result = cmd_validate(s);
    } else if (command == "simulate") {
      result = cmd_simulate(s);
    } else {
      result = cmd_diagnose(s, opt.trajectory.empty() ? std::nullopt
                                                      : std::optional<std::string>(opt.trajectory));
    }
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    if (!opt.quiet) std::cout << result.report;
    return result.exit_code;
  } catch (const hyperham::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return hyperham::kExitIoError;
  } catch (const hyperham::ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return hyperham::kExitRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hyperham::kExitRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quaternionic integrable systems and hyperhamiltonian dynamics"};
  app.require_subcommand(1);

  Options opt;
  auto* validate = app.add_subcommand("validate", "Check generator sets / hyperkahler structure");
  auto* simulate = app.add_subcommand("simulate", "Integrate and write the trajectory CSV and run summary");
  auto* diagnose = app.add_subcommand("diagnose", "Evaluate conservation and geometry diagnostics");
  add_common(validate, opt);
  add_common(simulate, opt);
  add_common(diagnose, opt);
  diagnose->add_option("--trajectory", opt.trajectory, "Diagnose this CSV instead of simulating");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hyperham::kExitRuntimeError;
  }

  for (auto* cmd : {validate, simulate, diagnose}) {
    if (cmd->parsed()) return run(cmd->get_name(), opt);
  }
  return hyperham::kExitRuntimeError;
}
