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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ticktalk::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitDiagnostics = 1,
    kExitInput = 2,
    kExitInfeasible = 3,
};

/// Compiles a .tt program to canonical .ttg. Diagnostics go to `err`, as
/// text or, with `diag_json`, as one JSON document.
int compile_command(const std::string& source_path, const std::string& out_path, bool diag_json, std::ostream& err);

struct SimulateOptions {
    std::string graph_path;
    std::string scenario_path;
    std::uint64_t seed = 0;
    /// Inclusive seed range; overrides `seed`. Output paths get the seed
    /// spliced in before the extension ("m.json" -> "m.seed7.json").
    std::optional<std::pair<std::uint64_t, std::uint64_t>> seeds;
    std::string until;  // duration literal
    std::optional<std::string> trace_path;
    std::optional<std::string> metrics_path;
    unsigned threads = 0;  // 0: hardware concurrency
};

int simulate_command(const SimulateOptions& options, std::ostream& err);

/// CSV summary with one row per metrics file.
int report_command(const std::vector<std::string>& metrics_paths, std::ostream& out, std::ostream& err);

/// "A..B" with A <= B.
std::optional<std::pair<std::uint64_t, std::uint64_t>> parse_seed_range(const std::string& text);

std::string per_seed_path(const std::string& path, std::uint64_t seed);

}  // namespace ticktalk::cli
