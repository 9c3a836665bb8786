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

#include <map>
#include <string>
#include <vector>

#include "ticktalk/rtm/registry.hpp"

namespace ticktalk::sim {

class ScenarioError : public Error {
public:
    using Error::Error;
};

/// How an opaque op's result behaves as an `if` condition.
enum class Truthiness { Always, Never, TargetStationary };

struct OpSpec {
    std::string name;
    ExecBounds exec;
    Truthiness truthy = Truthiness::Always;
};

struct Waypoint {
    Nanos t_ns = 0;
    Position position;
};

struct Defaults {
    Nanos guard_band_ns = kNanosPerMilli;
    int max_rounds = 32;
    double alpha = 0.2;
    int grid_divisions = 100;
    double high_precision_factor = 10;
    double sync_z = 3.0;
    /// Bound assumed on |local - reference| for a clock that was never synced.
    Nanos unsynced_uncertainty_ns = 10 * kNanosPerMilli;
    /// Members of a group at or below this precision run in High mode while awake.
    Nanos high_precision_threshold_ns = 10 * kNanosPerMicro;
    std::int64_t max_events = 20'000'000;
};

struct Scenario {
    int version = 1;
    std::string epoch_label;
    WallTime wall_time_at_start;
    Defaults defaults;
    rtm::Registry registry;
    /// Reference clock that `self` resolves to.
    std::string self_clock;
    bool sync_enabled = true;
    std::vector<Waypoint> trajectory;
    std::map<std::string, OpSpec> ops;

    /// Throws ScenarioError on dangling references or a non-increasing trajectory.
    void check() const;

    Position target_position(Nanos t) const;
    /// Zero velocity at t: before the first waypoint, after the last, or on a
    /// segment whose endpoints coincide.
    bool target_stationary(Nanos t) const;

    /// Per-ensemble bound, else the op declaration, else zero.
    ExecBounds exec_bounds(const std::string& ensemble, const std::string& op) const;
    Truthiness truthiness(const std::string& op) const;
};

}  // namespace ticktalk::sim
