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

#ifndef STCPDG_SCENARIO_HPP
#define STCPDG_SCENARIO_HPP

#include "stcpdg/core.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace stcpdg {

inline constexpr int kScenarioFormatVersion = 1;

/// Parses a YAML scenario document. Every section is optional and falls back
/// to the ScenarioConfig defaults; unknown keys, wrong types and invalid
/// values raise ConfigError with a "source:line:column: " prefix.
ScenarioConfig parse_scenario(std::string_view text, const std::string& source = "<scenario>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Inverse of parse_scenario: parse_scenario(dump_scenario(c)) == c.
std::string dump_scenario(const ScenarioConfig& config);
void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path);

}  // namespace stcpdg

#endif  // STCPDG_SCENARIO_HPP
