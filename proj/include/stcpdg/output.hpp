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

#ifndef STCPDG_OUTPUT_HPP
#define STCPDG_OUTPUT_HPP

#include "stcpdg/core.hpp"
#include "stcpdg/scvx.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace stcpdg {

inline constexpr int kOutputFormatVersion = 1;

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunArtifacts {
  const ScenarioConfig* config = nullptr;
  const ScvxResult* result = nullptr;
  const VerificationReport* report = nullptr;
  const FineTrajectory* fine = nullptr;
  double verify_tolerance = 1e-3;  // recorded in the summary
  bool verification_passed = false;
};

// Individual writers; each emits a header row followed by data rows.
void write_trajectory_csv(std::ostream& os, const SolutionVariable& solution, const ScenarioConfig& config);
void write_history_csv(std::ostream& os, const ScvxResult& result);
void write_fine_csv(std::ostream& os, const FineTrajectory& fine);
std::string summary_json(const RunArtifacts& run);

/// Writes trajectory.csv, summary.json, history.csv and fine.csv into
/// out_dir, creating it if needed. Throws OutputError on I/O failure.
void emit_outputs(const RunArtifacts& run, const std::filesystem::path& out_dir);

}  // namespace stcpdg

#endif  // STCPDG_OUTPUT_HPP
