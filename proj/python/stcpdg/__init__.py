# Copyright 2026 The stcpdg Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Powered-descent guidance with state-triggered constraints.

Thin wrapper over the C++ core: load a scenario, run the solver, inspect or
write the results.
"""

from ._core import (
    ConfigError,
    Run,
    ScenarioConfig,
    backend_names,
    dump_scenario,
    load_scenario,
    parse_scenario,
    projected,
    run,
    shat,
    solve_conic,
)

__all__ = [
    "ConfigError",
    "Run",
    "ScenarioConfig",
    "backend_names",
    "dump_scenario",
    "load_scenario",
    "parse_scenario",
    "projected",
    "run",
    "shat",
    "solve_conic",
]
__version__ = "0.1.0"
