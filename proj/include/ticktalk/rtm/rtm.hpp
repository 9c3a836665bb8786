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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ticktalk/ir/firing.hpp"
#include "ticktalk/ir/graph.hpp"
#include "ticktalk/rtm/registry.hpp"

namespace ticktalk::rtm {

// Recruitment ---------------------------------------------------------------

/// Ensembles within the closed ball of `radius_m` around `center` that have
/// `capability` (any capability when empty), sorted by id.
std::vector<std::string> get_sensors(const Registry& registry, sim::Position center, double radius_m,
                                     const std::string& capability);

struct Recruitment {
    std::vector<std::string> joined;
    std::vector<std::string> departed;
    std::vector<std::string> retained;
};

Recruitment re_recruit(const std::vector<std::string>& previous, sim::Position center, double radius_m,
                       const Registry& registry, const std::string& capability);

// Placement -----------------------------------------------------------------

class NoFeasiblePlacement : public Error {
public:
    NoFeasiblePlacement(std::string node, const std::string& reason);
    std::string node;
};

struct Placement {
    /// Node id to ensemble. A set-expansion node maps to the ensemble that
    /// coordinates it; its members are recruited at run time.
    std::map<std::string, std::string> assigned;
    /// Set-expansion node id to every ensemble able to run its method.
    std::map<std::string, std::vector<std::string>> candidates;
};

/// Leader when capable, else the lowest-id capable ensemble. Break nodes
/// follow the producer of their guard.
Placement place(const ir::DataflowGraph& graph, const Registry& registry);

// Sync domains --------------------------------------------------------------

class PrecisionUnachievable : public Error {
public:
    PrecisionUnachievable(std::string member, Nanos floor, const std::string& why);
    std::string member;
    Nanos floor_ns;
};

class MemberLinkDown : public Error {
public:
    explicit MemberLinkDown(std::string member);
    std::string member;
};

struct SyncDomain {
    std::string id;
    std::vector<std::string> members;
    std::string reference;
    Nanos precision_ns = 0;
    Nanos established_at_true_ns = 0;
    Nanos validity_ns = 0;
};

/// How long a token stays sound: the precision budget left after sync,
/// spent at the clock's residual drift rate. Max Nanos when unbounded.
Nanos token_validity(double residual_rate_ppm, Nanos precision_ns, Nanos achieved_ns);

struct MemberSync {
    std::vector<clocks::SyncResult> attempts;  // one per exchange run
    ir::SyncToken token;
    Nanos completed_at_true_ns = 0;
    bool self_sync = false;
};

/// Syncs one clock, retrying while the achieved precision misses the target
/// or the token would lapse before `hold_until_true_ns` (at most `attempts`
/// runs). A token that meets the precision but expires early is returned
/// after the last attempt. Throws PrecisionUnachievable or MemberLinkDown.
MemberSync sync_member(const std::string& member, clocks::LocalClock& clock, const clocks::ReferenceClock& reference,
                       Nanos precision_ns, const sim::NetworkLink& link, const clocks::PowerModel& power,
                       const clocks::SyncParams& params, clocks::SyncNoise noise, Nanos now_true_ns,
                       int attempts = 3, Nanos hold_until_true_ns = 0);

struct DomainResult {
    SyncDomain domain;
    std::map<std::string, ir::SyncToken> tokens;
    std::map<std::string, MemberSync> syncs;
};

/// Syncs every member against `reference` at `now_true_ns`. All-or-nothing:
/// a failing member leaves every clock in `member_clocks` untouched.
DomainResult establish_sync_domain(const std::vector<std::string>& members, const std::string& reference,
                                   Nanos precision_ns, std::map<std::string, clocks::LocalClock>& member_clocks,
                                   const Registry& registry, const clocks::SyncParams& params, std::uint64_t seed,
                                   Nanos now_true_ns);

// Harmonization -------------------------------------------------------------

/// Periodic exclusive reservation: [phase + k*period, phase + k*period + width).
struct Window {
    Nanos phase_ns = 0;
    Nanos width_ns = 0;
    Nanos period_ns = 0;
    friend bool operator==(const Window&, const Window&) = default;
};

/// True when two periodic windows intersect anywhere on the time line.
bool windows_overlap(const Window& a, const Window& b);

struct BlockRequest {
    std::string tenant;
    std::string block_id;
    std::string op;
    std::string clock;  // resolved reference clock id
    bool timing_bearing = false;
    std::optional<Window> window;  // phase ignored on input
};

struct TenancyEntry {
    BlockRequest block;
    std::optional<Window> reserved;
};

struct Tenancy {
    std::map<std::string, std::vector<TenancyEntry>> by_ensemble;
};

struct ConflictReport {
    enum class Kind { ClockIncompatible, WindowInfeasible, CapabilityMissing, PrecisionUnachievable };
    Kind kind = Kind::ClockIncompatible;
    std::vector<std::string> blocks;
    std::string explanation;
};

std::string conflict_kind_name(ConflictReport::Kind kind);

struct Accept {
    std::optional<Window> window;
    std::string clock;
};

using HarmonizeResult = std::variant<Accept, ConflictReport>;

bool clocks_compatible(const Registry& registry, const std::string& a, const std::string& b);

/// Checks a new block against other tenants' blocks on `ensemble`:
/// clock compatibility for timing-bearing blocks, then the first phase on
/// the grid gcd(periods)/grid_divisions whose window clears every other
/// tenant's window over the hyperperiod.
HarmonizeResult harmonize(const Tenancy& tenancy, const BlockRequest& block, const std::string& ensemble,
                          const Registry& registry, int grid_divisions = 100);

void admit(Tenancy& tenancy, const BlockRequest& block, const std::string& ensemble, const Accept& accept);

// Latency feedback ----------------------------------------------------------

struct LinkEstimate {
    double mode_ns = 0;
    double jitter_ns = 0;
    Nanos guard_ns = 0;
};

struct FeedbackState {
    double alpha = 0.2;
    Nanos base_guard_ns = kNanosPerMilli;
    std::map<std::string, LinkEstimate> links;

    /// Seeds an estimate from the configured link parameters.
    void track(const sim::NetworkLink& link);
};

/// Folds each sample into its link's EWMA of mode and of the absolute
/// deviation, then recomputes the guard band as base + 3 * jitter.
void feedback_update(FeedbackState& state, const std::map<std::string, std::vector<Nanos>>& samples);

}  // namespace ticktalk::rtm
