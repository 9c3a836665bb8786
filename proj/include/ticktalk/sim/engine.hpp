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
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "ticktalk/clocks/clock.hpp"
#include "ticktalk/ir/firing.hpp"
#include "ticktalk/ir/graph.hpp"
#include "ticktalk/rtm/rtm.hpp"
#include "ticktalk/sim/scenario.hpp"
#include "ticktalk/sim/trace.hpp"

namespace ticktalk::sim {

class OverrunError : public Error {
public:
    OverrunError(std::string node, Nanos period, Nanos worst);
    std::string node;
};

class PlacementCapabilityError : public Error {
public:
    using Error::Error;
};

class SyncTokenExpired : public Error {
public:
    explicit SyncTokenExpired(std::string node);
    std::string node;
};

class IncompleteGroup : public Error {
public:
    explicit IncompleteGroup(std::string node);
    std::string node;
};

/// The program uses a construct the simulator does not execute.
class UnsupportedProgram : public Error {
public:
    using Error::Error;
};

// Event queue ---------------------------------------------------------------

enum class EventKind { MessageDeliver, NodeFire, ClockSync, Wakeup, Custom };

struct SimEvent {
    Nanos true_time_ns = 0;
    EventKind kind = EventKind::Custom;
    std::uint64_t sequence = 0;
    std::function<void()> payload;
};

/// Total order on (true_time_ns, sequence); sequence is the insertion count.
class EventQueue {
public:
    void push(Nanos true_time_ns, EventKind kind, std::function<void()> payload);
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    Nanos next_time() const { return heap_.top().true_time_ns; }
    SimEvent pop();

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const {
            return a.true_time_ns != b.true_time_ns ? a.true_time_ns > b.true_time_ns : a.sequence > b.sequence;
        }
    };
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
    std::uint64_t next_sequence_ = 0;
};

// Runs ----------------------------------------------------------------------

struct Tenant {
    std::string name = "t1";
    ir::DataflowGraph graph;
    /// Reference clock `self` resolves to; the scenario's self_clock when unset.
    std::optional<std::string> self_clock;
    /// Computed by rtm::place when unset.
    std::optional<rtm::Placement> placement;
};

struct RunResult {
    EventTrace trace;
    Metrics metrics;
    /// Final virtual-clock corrections keyed "tenant/ensemble/reference".
    std::map<std::string, clocks::Correction> corrections;
    std::vector<std::string> admitted;
    std::vector<std::string> rejected;
};

/// Executes every admitted tenant's graph until `until_ns` (exclusive).
/// Tenants are admitted first come, first served through harmonize.
/// Throws rtm::NoFeasiblePlacement, PlacementCapabilityError, OverrunError,
/// UnsupportedProgram or ScenarioError before any event runs.
RunResult run(const Scenario& scenario, const std::vector<Tenant>& tenants, std::uint64_t seed, Nanos until_ns);
RunResult run(const Scenario& scenario, const ir::DataflowGraph& graph, std::uint64_t seed, Nanos until_ns);

// Building blocks, also used by run -------------------------------------------

struct ScheduledFiring {
    std::int64_t k = 0;
    Nanos clock_ns = 0;
    Nanos true_ns = 0;
};

/// Firings at clock times k * period + phase, k = 0, 1, ..., while the true
/// instant is before `until_ns`. Throws OverrunError when worst_exec > period.
std::vector<ScheduledFiring> run_frequency(const clocks::Affine& clock, Nanos period_ns, Nanos phase_ns,
                                           Nanos worst_exec_ns, Nanos until_ns, const std::string& node = "");

struct SimultaneousMember {
    std::string node;
    clocks::Affine clock;
    std::optional<ir::SyncToken> token;
    /// Read noise at the action instant; the member acts when its noisy
    /// reading reaches the target, so the true action shifts by -jitter.
    Nanos read_jitter_ns = 0;
};

/// True action time of each member: the first instant its clock reads the
/// target. Throws SyncTokenExpired when a token is missing or lapses first.
std::map<std::string, Nanos> execute_simultaneous(const std::vector<SimultaneousMember>& members,
                                                  Nanos target_clock_ns, bool require_tokens = true);

struct Simultaneity {
    Nanos spread_ns = 0;
    std::map<std::string, double> deviations_ns;  // relative to the group mean
};

Simultaneity measure_simultaneity(const std::map<std::string, Nanos>& action_times);

/// From "fire" records of the given nodes; with `epoch`, only that epoch,
/// else each node's first firing. Throws IncompleteGroup.
Simultaneity measure_simultaneity(const EventTrace& trace, const std::set<std::string>& group,
                                  std::optional<std::int64_t> epoch = std::nullopt);

struct LatencyCheck {
    std::vector<LatencyViolation> violations;
    std::vector<std::string> unmatched;  // "source#k" with no consequent sink firing
};

/// Matches each source firing to the first sink firing whose lineage names
/// it; latency above the bound (strictly) is a violation. No constraint, no
/// violations.
LatencyCheck check_latency(const EventTrace& trace, const std::optional<ir::Latency>& constraint,
                           const std::string& source, const std::string& sink);

}  // namespace ticktalk::sim
