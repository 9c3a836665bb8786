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


#include <algorithm>
#include <limits>

#include "ticktalk/sim/engine.hpp"

namespace ticktalk::sim {

OverrunError::OverrunError(std::string n, Nanos period, Nanos worst)
    : Error("overrun on " + n + ": worst-case execution " + std::to_string(worst) + " ns exceeds period " +
            std::to_string(period) + " ns"),
      node(std::move(n)) {}

SyncTokenExpired::SyncTokenExpired(std::string n) : Error("sync token expired for " + n), node(std::move(n)) {}

IncompleteGroup::IncompleteGroup(std::string n) : Error("group member never fired: " + n), node(std::move(n)) {}

void EventQueue::push(Nanos t, EventKind kind, std::function<void()> payload) {
    heap_.push(SimEvent{t, kind, next_sequence_++, std::move(payload)});
}

SimEvent EventQueue::pop() {
    SimEvent e = heap_.top();
    heap_.pop();
    return e;
}

std::vector<ScheduledFiring> run_frequency(const clocks::Affine& clock, Nanos period, Nanos phase, Nanos worst_exec,
                                           Nanos until, const std::string& node) {
    if (period <= 0) throw Error("period must be positive");
    if (worst_exec > period) throw OverrunError(node, period, worst_exec);
    std::vector<ScheduledFiring> out;
    for (std::int64_t k = 0;; ++k) {
        const Nanos c = k * period + phase;
        const Nanos t = clocks::true_time_at(clock, c);
        if (t >= until) break;
        if (t >= 0) out.push_back({k, c, t});
    }
    return out;
}

std::map<std::string, Nanos> execute_simultaneous(const std::vector<SimultaneousMember>& members, Nanos target,
                                                  bool require_tokens) {
    std::map<std::string, Nanos> out;
    for (const auto& m : members) {
        const Nanos t = clocks::true_time_at(m.clock, target - m.read_jitter_ns);
        if (require_tokens && (!m.token || m.token->expires_at_ns < t)) throw SyncTokenExpired(m.node);
        out[m.node] = t;
    }
    return out;
}

Simultaneity measure_simultaneity(const std::map<std::string, Nanos>& times) {
    Simultaneity s;
    if (times.empty()) return s;
    Nanos lo = std::numeric_limits<Nanos>::max(), hi = std::numeric_limits<Nanos>::min();
    long double sum = 0;
    for (const auto& [n, t] : times) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
        sum += t;
    }
    const long double mean = sum / times.size();
    s.spread_ns = hi - lo;
    for (const auto& [n, t] : times) s.deviations_ns[n] = static_cast<double>(t - mean);
    return s;
}

Simultaneity measure_simultaneity(const EventTrace& trace, const std::set<std::string>& group,
                                  std::optional<std::int64_t> epoch) {
    std::map<std::string, Nanos> times;
    for (const auto& r : trace.records) {
        if (r.action != "fire" || !group.count(r.node) || times.count(r.node)) continue;
        if (epoch && r.detail.value("epoch", std::int64_t{-1}) != *epoch) continue;
        times[r.node] = r.t_true_ns;
    }
    for (const auto& n : group)
        if (!times.count(n)) throw IncompleteGroup(n);
    return measure_simultaneity(times);
}

LatencyCheck check_latency(const EventTrace& trace, const std::optional<ir::Latency>& constraint,
                           const std::string& source, const std::string& sink) {
    LatencyCheck out;
    if (!constraint) return out;
    std::vector<std::pair<std::int64_t, Nanos>> sources;
    std::map<std::string, Nanos> sink_by_tag;  // first sink firing naming each tag
    for (const auto& r : trace.records) {
        if (r.action != "fire") continue;
        if (r.node == source) sources.emplace_back(r.detail.at("firing").get<std::int64_t>(), r.t_true_ns);
        if (r.node == sink)
            for (const auto& tag : r.detail.at("lineage")) sink_by_tag.emplace(tag.get<std::string>(), r.t_true_ns);
    }
    for (const auto& [k, t] : sources) {
        const std::string tag = source + "#" + std::to_string(k);
        auto it = sink_by_tag.find(tag);
        if (it == sink_by_tag.end()) {
            out.unmatched.push_back(tag);
            continue;
        }
        const Nanos latency = it->second - t;
        if (latency > constraint->bound_ns)
            out.violations.push_back({constraint->scope, source, sink, k, latency, constraint->bound_ns});
    }
    return out;
}

}  // namespace ticktalk::sim
