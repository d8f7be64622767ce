/*
 Copyright 2026 The stcpdg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// stcpdg command-line driver.
//
//   stcpdg run <scenario.yaml> [--out-dir DIR] [--max-iterations N]
//              [--backend NAME] [--dump-subproblems] [--seed N] [--quiet]
//   stcpdg check <scenario.yaml>      validate and print the normalized file
//   stcpdg backends                   list conic backends
//
// Exit codes: 0 converged and verified, 1 input error, 2 not converged,
// 3 verification or output failure.

#include "stcpdg/conic.hpp"
#include "stcpdg/output.hpp"
#include "stcpdg/scenario.hpp"
#include "stcpdg/scvx.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

enum Exit { kOk = 0, kInputError = 1, kNotConverged = 2, kVerifyFailed = 3 };

struct RunFlags {
  std::string scenario;
  std::string out_dir = "out";
  int max_iterations = -1;
  std::string backend = "ipm";
  bool dump_subproblems = false;
  std::uint64_t seed = 0;  // reserved: the pipeline has no randomness
  bool quiet = false;
};

void log_iteration(const stcpdg::ScvxIterate& it, double wall) {
  nlohmann::json rec = {{"event", "iteration"},
                        {"iteration", it.iteration},
                        {"sigma", it.metrics.sigma},
                        {"nu_l1", it.metrics.nu_l1},
                        {"trust_deviation", it.metrics.trust_deviation},
                        {"status", stcpdg::to_string(it.solve_status)},
                        {"wall_time", wall}};
  std::cerr << rec.dump() << '\n';
}

int run_scenario(const RunFlags& flags) {
  using namespace stcpdg;
  ScenarioConfig config;
  try {
    config = load_scenario(flags.scenario);
    make_backend(flags.backend);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  const std::filesystem::path out_dir = flags.out_dir;
  if (flags.dump_subproblems) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "subproblems", ec);
    if (ec) {
      std::cerr << "error: cannot create " << (out_dir / "subproblems").string() << ": " << ec.message() << '\n';
      return kVerifyFailed;
    }
  }

  ScvxOptions options;
  options.backend = flags.backend;
  options.max_iterations = flags.max_iterations;
  const auto start = std::chrono::steady_clock::now();
  if (!flags.quiet) {
    options.observer = [&](const ScvxIterate& it) {
      log_iteration(it, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    };
  }
  if (flags.dump_subproblems) {
    options.on_subproblem = [&](int iteration, const ConicSubproblem& sub) {
      char name[32];
      std::snprintf(name, sizeof name, "iter_%03d.txt", iteration);
      std::ofstream out(out_dir / "subproblems" / name);
      write_program(out, sub.program);
    };
  }

  ScvxResult result;
  try {
    result = run(config, options);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }

  const VerificationReport report = verify(result.solution, config);
  const FineTrajectory fine = propagate_fine(result.solution, config);
  const VerifyLimits limits;
  const auto failures = verification_failures(report, limits);

  RunArtifacts artifacts;
  artifacts.config = &config;
  artifacts.result = &result;
  artifacts.report = &report;
  artifacts.fine = &fine;
  artifacts.verify_tolerance = limits.defect;
  artifacts.verification_passed = failures.empty();
  try {
    emit_outputs(artifacts, out_dir);
  } catch (const OutputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerifyFailed;
  }

  std::cout << config.name << ": " << result.message << ", t_c = " << result.solution.t_c
            << ", t_b = " << result.solution.t_b << ", max defect = " << report.max_defect << '\n';
  if (result.status != ScvxStatus::converged) return kNotConverged;
  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << "verification: " << f << '\n';
    return kVerifyFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Powered-descent guidance with state-triggered constraints"};
  app.require_subcommand(1);

  RunFlags flags;
  auto* run = app.add_subcommand("run", "Solve a scenario and write outputs");
  run->add_option("scenario", flags.scenario, "Scenario YAML file")->required();
  run->add_option("--out-dir", flags.out_dir, "Output directory")->capture_default_str();
  run->add_option("--max-iterations", flags.max_iterations, "Override the scenario iteration limit")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--backend", flags.backend, "Conic backend")->capture_default_str();
  run->add_flag("--dump-subproblems", flags.dump_subproblems, "Write every subproblem to <out-dir>/subproblems");
  run->add_option("--seed", flags.seed, "Reserved; the solver is deterministic");
  run->add_flag("-q,--quiet", flags.quiet, "Suppress per-iteration log records");

  std::string check_path;
  auto* check = app.add_subcommand("check", "Validate a scenario and print it normalized");
  check->add_option("scenario", check_path, "Scenario YAML file")->required();

  app.add_subcommand("backends", "List the available conic backends");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*run) return run_scenario(flags);
  if (*check) {
    try {
      std::cout << stcpdg::dump_scenario(stcpdg::load_scenario(check_path));
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kInputError;
    }
    return kOk;
  }
  for (const auto& name : stcpdg::backend_names()) std::cout << name << '\n';
  return kOk;
}
