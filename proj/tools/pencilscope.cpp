#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pencilscope/report.hpp"

using namespace pencilscope;

int main(int argc, char** argv) {
  CLI::App app{"pencilscope: spectral analysis of selfadjoint matrix pencils and linearized Hamiltonians"};
  app.require_subcommand(1);

  std::string input;
  std::string csv_path;
  std::vector<std::string> contour_specs;
  std::string tol_profile = "default";
  double lambda_min = 0.0, lambda_max = 0.0;
  int steps = 0;
  unsigned long long seed = 0;
  bool has_min = false, has_max = false, has_steps = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--input", input, "problem file (JSON)")->required();
    cmd->add_option("--lambda-min", lambda_min, "window lower bound")->each([&](const std::string&) {
      has_min = true;
    });
    cmd->add_option("--lambda-max", lambda_max, "window upper bound")->each([&](const std::string&) {
      has_max = true;
    });
    cmd->add_option("--steps", steps, "grid points across the window")->each([&](const std::string&) {
      has_steps = true;
    });
    cmd->add_option("--csv", csv_path, "write the matched branch table to this CSV path");
    cmd->add_option("--contour", contour_specs,
                    "closed contour as 'x0,y0;x1,y1;...' (repeatable; evans command)");
    cmd->add_option("--seed", seed, "seed for randomized diagnostics (current commands are deterministic)");
    cmd->add_option("--tol-profile", tol_profile, "tolerance profile: default|strict")
        ->check(CLI::IsMember({"default", "strict"}));
  };

  for (const char* name : {"branches", "signatures", "chains", "evans", "index", "sweep"})
    add_common(app.add_subcommand(name));

  CLI11_PARSE(app, argc, argv);

  CommandOptions options;
  options.command = app.get_subcommands().front()->get_name();
  if (has_min) options.lambda_min = lambda_min;
  if (has_max) options.lambda_max = lambda_max;
  if (has_steps) options.steps = steps;
  options.csv_path = csv_path;
  options.tol_profile = tol_profile;
  for (const std::string& spec : contour_specs) {
    try {
      options.contours.push_back(parse_contour_spec(spec));
    } catch (const Error& e) {
      std::cerr << e.what() << "\n";
      return 1;
    }
  }
  if (const char* env = std::getenv("PENCILSCOPE_THREADS")) {
    options.max_threads = std::max(1, std::atoi(env));
  }

  try {
    Problem problem = load_problem(input);
    CommandOutcome outcome = run_command(problem, options);
    std::cout << outcome.json.dump();
    return outcome.exit_code;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
