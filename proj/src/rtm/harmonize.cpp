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


#include <cmath>
#include <numeric>

#include "ticktalk/rtm/rtm.hpp"

namespace ticktalk::rtm {

std::string conflict_kind_name(ConflictReport::Kind kind) {
    switch (kind) {
    case ConflictReport::Kind::ClockIncompatible: return "ClockIncompatible";
    case ConflictReport::Kind::WindowInfeasible: return "WindowInfeasible";
    case ConflictReport::Kind::CapabilityMissing: return "CapabilityMissing";
    case ConflictReport::Kind::PrecisionUnachievable: return "PrecisionUnachievable";
    }
    return "Unknown";
}

bool windows_overlap(const Window& a, const Window& b) {
    if (a.width_ns <= 0 || b.width_ns <= 0) return false;
    // Start offsets between the two trains form the lattice
    // (b.phase - a.phase) + m * gcd; [0, wa) and [d, d + wb) meet iff -wb < d < wa.
    const Nanos g = std::gcd(a.period_ns, b.period_ns);
    Nanos r = (b.phase_ns - a.phase_ns) % g;
    if (r < 0) r += g;
    return r < a.width_ns || r > g - b.width_ns;
}

bool clocks_compatible(const Registry& registry, const std::string& a, const std::string& b) {
    return a == b || registry.syntonizable_pair(a, b);
}

HarmonizeResult harmonize(const Tenancy& tenancy, const BlockRequest& block, const std::string& ensemble,
                          const Registry& registry, int grid_divisions) {
    const auto e = registry.ensembles.find(ensemble);
    if (e == registry.ensembles.end()) throw RegistryError("unknown ensemble " + ensemble);
    if (!block.op.empty() && !e->second.capabilities.count(block.op))
        return ConflictReport{ConflictReport::Kind::CapabilityMissing,
                              {block.block_id},
                              ensemble + " does not offer " + block.op};

    std::vector<const TenancyEntry*> others;
    if (auto it = tenancy.by_ensemble.find(ensemble); it != tenancy.by_ensemble.end())
        for (const auto& entry : it->second)
            if (entry.block.tenant != block.tenant) others.push_back(&entry);

    if (block.timing_bearing) {
        for (const auto* o : others) {
            if (o->block.timing_bearing && !clocks_compatible(registry, o->block.clock, block.clock))
                return ConflictReport{ConflictReport::Kind::ClockIncompatible,
                                      {o->block.block_id, block.block_id},
                                      "on " + ensemble + ", " + o->block.block_id + " is bound to " + o->block.clock +
                                          " and " + block.block_id + " to " + block.clock +
                                          ", which are not declared syntonizable"};
        }
    }

    if (!block.window) return Accept{std::nullopt, block.clock};
    Window w = *block.window;
    w.phase_ns = 0;
    if (w.period_ns <= 0) throw Error("window period must be positive");
    if (w.width_ns > w.period_ns)
        return ConflictReport{ConflictReport::Kind::WindowInfeasible,
                              {block.block_id},
                              "window " + std::to_string(w.width_ns) + " ns exceeds its own period"};

    std::vector<Window> reserved;
    std::vector<std::string> names;
    for (const auto* o : others)
        if (o->reserved) {
            reserved.push_back(*o->reserved);
            names.push_back(o->block.block_id);
        }
    if (reserved.empty()) return Accept{w, block.clock};

    Nanos g = w.period_ns;
    for (const auto& r : reserved) g = std::gcd(g, r.period_ns);
    const Nanos step = std::max<Nanos>(1, g / std::max(1, grid_divisions));
    for (Nanos phase = 0; phase < w.period_ns; phase += step) {
        w.phase_ns = phase;
        bool clear = true;
        for (const auto& r : reserved) {
            if (windows_overlap(w, r)) {
                clear = false;
                break;
            }
        }
        if (clear) return Accept{w, block.clock};
    }
    names.push_back(block.block_id);
    return ConflictReport{ConflictReport::Kind::WindowInfeasible, names,
                          "no phase on the " + std::to_string(step) + " ns grid clears the windows already on " +
                              ensemble};
}

void admit(Tenancy& tenancy, const BlockRequest& block, const std::string& ensemble, const Accept& accept) {
    tenancy.by_ensemble[ensemble].push_back({block, accept.window});
}

void FeedbackState::track(const sim::NetworkLink& link) {
    if (links.count(link.id)) return;
    LinkEstimate e;
    e.mode_ns = static_cast<double>(link.latency_mode_ns);
    e.jitter_ns = link.latency_jitter_std_ns;
    e.guard_ns = base_guard_ns + static_cast<Nanos>(std::ceil(3 * e.jitter_ns));
    links[link.id] = e;
}

void feedback_update(FeedbackState& state, const std::map<std::string, std::vector<Nanos>>& samples) {
    for (const auto& [id, list] : samples) {
        auto it = state.links.find(id);
        if (it == state.links.end() || list.empty()) continue;
        auto& e = it->second;
        for (Nanos s : list) {
            const double x = static_cast<double>(s);
            e.jitter_ns = (1 - state.alpha) * e.jitter_ns + state.alpha * std::fabs(x - e.mode_ns);
            e.mode_ns = (1 - state.alpha) * e.mode_ns + state.alpha * x;
        }
        e.guard_ns = state.base_guard_ns + static_cast<Nanos>(std::ceil(3 * e.jitter_ns));
    }
}

}  // namespace ticktalk::rtm
