#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "segopt/commands.hpp"
#include "segopt/errors.hpp"
#include "segopt/instance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Consumer-optimal market segmentation with nonlinear pricing"};
  std::string command, path, out = "out";
  std::optional<std::size_t> lambda_steps, h_grid;
  std::optional<double> mesh;
  app.add_option("command", command, "solve | frontier | diagnose | screen | discrete | oracle")
      ->required()
      ->check(CLI::IsMember(segopt::command_names()));
  app.add_option("instance", path, "instance JSON file")->required();
  app.add_option("--out", out, "output directory");
  app.add_option("--lambda-steps", lambda_steps, "number of lambda values in frontier sweeps")
      ->check(CLI::Range(2, 100001));
  app.add_option("--mesh", mesh, "simplex mesh step for the brute-force oracle")->check(CLI::Range(1.0 / 64.0, 0.5));
  app.add_option("--h-grid", h_grid, "uniform samples per rent curve")->check(CLI::Range(16, 1 << 20));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : segopt::kExitInvalid;
  }
  try {
    auto inst = segopt::parse_instance(path);
    if (lambda_steps) inst.options.lambda_steps = *lambda_steps;
    if (mesh) inst.options.mesh = *mesh;
    if (h_grid) inst.options.h_grid = *h_grid;
    return segopt::run_command(command, inst, out, std::cout);
  } catch (const segopt::Error& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return segopt::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return segopt::kExitFailure;
  }
}
