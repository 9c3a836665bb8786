/*
 * Copyright 2026 The TickTalk Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <string>

#include "json.hpp"
#include "ticktalk/sim/scenario.hpp"

namespace ticktalk::cli {

/// Strict loader for version 1 scenario files. Unknown keys, missing
/// required keys, mistyped values and dangling references all raise
/// sim::ScenarioError with a JSON-pointer-like location.
///
/// Durations are DSL literals ("1us", "100ms"), optionally signed for
/// offsets ("-20us"); a bare integer is taken as nanoseconds.
sim::Scenario parse_scenario(const nlohmann::json& doc);
sim::Scenario load_scenario_text(const std::string& text);
sim::Scenario load_scenario_file(const std::string& path);

}  // namespace ticktalk::cli
