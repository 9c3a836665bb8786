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


#include "ticktalk/sim/trace.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace ticktalk::sim {

void EventTrace::append(TraceRecord record) {
    if (!records.empty() && record.t_true_ns < records.back().t_true_ns)
        throw TraceError("trace record at " + std::to_string(record.t_true_ns) + " ns precedes " +
                         std::to_string(records.back().t_true_ns) + " ns");
    records.push_back(std::move(record));
}

namespace {

Json record_json(const TraceRecord& r) {
    Json j;
    j["t_true_ns"] = r.t_true_ns;
    j["t_clock_ns"] = r.t_clock_ns;
    j["ensemble"] = r.ensemble;
    j["node"] = r.node;
    j["action"] = r.action;
    j["detail"] = r.detail;
    return j;
}

}  // namespace

void EventTrace::write_jsonl(std::ostream& out) const {
    for (const auto& r : records) out << record_json(r).dump() << '\n';
}

std::string EventTrace::to_jsonl() const {
    std::ostringstream ss;
    write_jsonl(ss);
    return ss.str();
}

EventTrace EventTrace::parse_jsonl(const std::string& text) {
    EventTrace t;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            const auto j = Json::parse(line);
            TraceRecord r;
            r.t_true_ns = j.at("t_true_ns").get<Nanos>();
            r.t_clock_ns = j.at("t_clock_ns").get<Nanos>();
            r.ensemble = j.at("ensemble").get<std::string>();
            r.node = j.at("node").get<std::string>();
            r.action = j.at("action").get<std::string>();
            r.detail = j.at("detail");
            t.append(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw TraceError("trace line " + std::to_string(n) + ": " + e.what());
        }
    }
    return t;
}

EventTrace EventTrace::for_tenant(const std::string& tenant) const {
    EventTrace t;
    const std::string prefix = tenant + "/";
    for (const auto& r : records)
        if (r.node.compare(0, prefix.size(), prefix) == 0) t.records.push_back(r);
    return t;
}

Json Metrics::to_json() const {
    Json j;
    j["seed"] = seed;
    j["spread_ns_by_group"] = Json::object();
    for (const auto& [g, v] : spread_ns_by_group) j["spread_ns_by_group"][g] = v;
    j["latency_violations"] = Json::array();
    for (const auto& v : latency_violations)
        j["latency_violations"].push_back({{"scope", v.scope},
                                           {"source", v.source},
                                           {"sink", v.sink},
                                           {"source_firing", v.source_firing},
                                           {"latency_ns", v.latency_ns},
                                           {"bound_ns", v.bound_ns}});
    j["energy_nj_by_ensemble"] = Json::object();
    for (const auto& [e, v] : energy_nj_by_ensemble) j["energy_nj_by_ensemble"][e] = v;
    j["sync_events"] = sync_events;
    j["firings"] = firings;
    j["conflicts"] = Json::array();
    for (const auto& c : conflicts)
        j["conflicts"].push_back(
            {{"kind", rtm::conflict_kind_name(c.kind)}, {"blocks", c.blocks}, {"explanation", c.explanation}});
    j["horizon_exceeded"] = horizon_exceeded;
    j["event_budget_exhausted"] = event_budget_exhausted;
    j["incomplete_groups"] = incomplete_groups;
    j["token_expirations"] = token_expirations;
    j["overruns"] = overruns;
    j["unmatched_firings"] = unmatched_firings;
    return j;
}

MetricsSummary summarize_metrics(const Json& m) {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw TraceError(std::string("invalid metrics: ") + what);
    };
    try {
        need(m.is_object(), "expected an object");
        MetricsSummary s;
        need(m.at("seed").is_number_unsigned(), "seed must be a non-negative integer");
        s.seed = m.at("seed").get<std::uint64_t>();
        need(m.at("spread_ns_by_group").is_object(), "spread_ns_by_group must be an object");
        for (const auto& [g, list] : m.at("spread_ns_by_group").items()) {
            need(list.is_array(), "spread lists must be arrays");
            Nanos mx = 0;
            for (const auto& v : list) {
                need(v.is_number_integer(), "spreads must be integers");
                mx = std::max(mx, v.get<Nanos>());
            }
            s.max_spread_by_group[g] = mx;
        }
        need(m.at("latency_violations").is_array(), "latency_violations must be an array");
        s.violations = static_cast<std::int64_t>(m.at("latency_violations").size());
        need(m.at("energy_nj_by_ensemble").is_object(), "energy_nj_by_ensemble must be an object");
        for (const auto& [e, v] : m.at("energy_nj_by_ensemble").items()) {
            need(v.is_number_integer(), "energies must be integers");
            s.total_energy_nj += v.get<std::int64_t>();
        }
        need(m.at("sync_events").is_number_integer(), "sync_events must be an integer");
        s.sync_events = m.at("sync_events").get<std::int64_t>();
        need(m.at("firings").is_number_integer(), "firings must be an integer");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw TraceError(std::string("invalid metrics: ") + e.what());
    }
}

}  // namespace ticktalk::sim
