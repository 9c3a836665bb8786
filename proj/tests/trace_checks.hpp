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

// Replay checks over a finished trace. Each returns a list of human-readable
// problems; an empty list means the property holds.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ticktalk/ir/firing.hpp"
#include "ticktalk/sim/engine.hpp"

namespace checks {

using ticktalk::Nanos;
using ticktalk::sim::EventTrace;
using ticktalk::sim::Json;

/// "t1/n001_captureImage[cam2]" -> {"t1", "n001_captureImage"}.
inline std::pair<std::string, std::string> split_node(const std::string& qid) {
    const auto slash = qid.find('/');
    std::string base = qid.substr(slash + 1);
    if (const auto br = base.find('['); br != std::string::npos) base.erase(br);
    return {qid.substr(0, slash), base};
}

/// Every "fire" record carries a token state that satisfies firing_ready
/// at its true time.
inline std::vector<std::string> firing_soundness(const EventTrace& trace,
                                                 const std::map<std::string, const ticktalk::ir::DataflowGraph*>& graphs) {
    std::vector<std::string> bad;
    for (const auto& r : trace.records) {
        if (r.action != "fire") continue;
        const auto [tenant, id] = split_node(r.node);
        const auto* node = graphs.at(tenant)->find(id);
        if (!node) {
            bad.push_back(r.node + ": not in the graph");
            continue;
        }
        auto rule_node = *node;
        ticktalk::ir::TokenState state;
        for (const auto& p : r.detail.at("ports")) state.put(p.get<std::string>());
        if (r.detail.contains("sync_waived")) {
            rule_node.firing_rule.sync.clear();
        } else if (r.detail.contains("sync")) {
            for (const auto& [clock, tok] : r.detail.at("sync").items())
                state.put_sync(clock, {tok[0].get<Nanos>(), tok[1].get<Nanos>()});
        }
        if (!ticktalk::ir::firing_ready(rule_node, state, r.t_true_ns))
            bad.push_back(r.node + " at " + std::to_string(r.t_true_ns) + ": firing rule not satisfied");
    }
    return bad;
}

/// Each delivery happens exactly its recorded latency after the send, and
/// the latency respects the sender link's minimum.
inline std::vector<std::string> causality(const EventTrace& trace, const ticktalk::rtm::Registry& reg) {
    std::vector<std::string> bad;
    std::map<std::string, std::multiset<Nanos>> sends;  // node -> send instants
    std::map<std::string, std::string> host;
    for (const auto& r : trace.records) {
        if (r.action == "complete" || r.action == "dispatch") {
            sends[r.node].insert(r.t_true_ns);
            host[r.node] = r.ensemble;
        }
        if (r.action != "deliver") continue;
        const auto from = r.detail.at("from").get<std::string>();
        const Nanos latency = r.detail.at("latency_ns").get<Nanos>();
        const Nanos sent = r.t_true_ns - latency;
        if (!sends[from].count(sent)) {
            bad.push_back(r.node + ": no send from " + from + " at " + std::to_string(sent));
            continue;
        }
        const auto& link = reg.links.at(reg.ensembles.at(host.at(from)).link);
        if (latency < link.latency_min_ns) bad.push_back(r.node + ": latency below link minimum");
    }
    return bad;
}

/// True time never decreases; per ensemble, clock readings never decrease
/// and advance whenever true time advances by at least 2 ns (one rounding
/// step of slack for rates below one).
inline std::vector<std::string> monotone(const EventTrace& trace) {
    std::vector<std::string> bad;
    std::map<std::string, std::pair<Nanos, Nanos>> last;
    Nanos prev = trace.records.empty() ? 0 : trace.records.front().t_true_ns;
    for (const auto& r : trace.records) {
        if (r.t_true_ns < prev) bad.push_back("true time decreases at " + std::to_string(r.t_true_ns));
        prev = r.t_true_ns;
        if (r.ensemble.empty()) continue;
        if (auto it = last.find(r.ensemble); it != last.end()) {
            const auto [t, c] = it->second;
            if (r.t_clock_ns < c || (r.t_true_ns - t >= 2 && r.t_clock_ns <= c))
                bad.push_back(r.ensemble + ": clock reading does not advance at " + std::to_string(r.t_true_ns));
        }
        last[r.ensemble] = {r.t_true_ns, r.t_clock_ns};
    }
    return bad;
}

inline std::vector<Nanos> spreads(const ticktalk::sim::Metrics& m, const std::string& group) {
    auto it = m.spread_ns_by_group.find(group);
    return it == m.spread_ns_by_group.end() ? std::vector<Nanos>{} : it->second;
}

}  // namespace checks
