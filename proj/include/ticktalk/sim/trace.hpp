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
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ticktalk/common.hpp"
#include "ticktalk/rtm/rtm.hpp"

namespace ticktalk::sim {

using Json = nlohmann::ordered_json;

struct TraceRecord {
    Nanos t_true_ns = 0;
    Nanos t_clock_ns = 0;
    std::string ensemble;
    std::string node;
    std::string action;
    Json detail = Json::object();
};

class TraceError : public Error {
public:
    using Error::Error;
};

struct EventTrace {
    std::vector<TraceRecord> records;

    /// Throws TraceError when the record would move true time backwards.
    void append(TraceRecord record);

    /// One JSON object per line, fields in the fixed order
    /// t_true_ns, t_clock_ns, ensemble, node, action, detail.
    void write_jsonl(std::ostream& out) const;
    std::string to_jsonl() const;
    static EventTrace parse_jsonl(const std::string& text);

    /// Records whose node id starts with "<tenant>/".
    EventTrace for_tenant(const std::string& tenant) const;
};

struct LatencyViolation {
    std::string scope;
    std::string source;
    std::string sink;
    std::int64_t source_firing = 0;
    Nanos latency_ns = 0;
    Nanos bound_ns = 0;
};

struct Metrics {
    std::uint64_t seed = 0;
    std::map<std::string, std::vector<Nanos>> spread_ns_by_group;
    std::vector<LatencyViolation> latency_violations;
    std::map<std::string, std::int64_t> energy_nj_by_ensemble;
    std::int64_t sync_events = 0;
    std::int64_t firings = 0;
    std::vector<rtm::ConflictReport> conflicts;
    bool horizon_exceeded = false;
    bool event_budget_exhausted = false;
    std::int64_t incomplete_groups = 0;
    std::int64_t token_expirations = 0;
    std::int64_t overruns = 0;
    std::vector<std::string> unmatched_firings;

    Json to_json() const;
};

/// The fields `report` needs from a metrics file.
struct MetricsSummary {
    std::uint64_t seed = 0;
    std::map<std::string, Nanos> max_spread_by_group;
    std::int64_t violations = 0;
    std::int64_t total_energy_nj = 0;
    std::int64_t sync_events = 0;
};

/// Throws TraceError when a required key is missing or mistyped.
MetricsSummary summarize_metrics(const Json& metrics);

}  // namespace ticktalk::sim
