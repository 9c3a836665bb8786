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


#include "ticktalk/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "ticktalk/cli/scenario_json.hpp"
#include "ticktalk/dsl/parser.hpp"
#include "ticktalk/ir/lower.hpp"
#include "ticktalk/ir/serialize.hpp"
#include "ticktalk/sim/engine.hpp"

namespace ticktalk::cli {

namespace {

using Json = nlohmann::ordered_json;

std::optional<std::string> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    return static_cast<bool>(out);
}

struct Diag {
    std::string code;
    SourceSpan span;
    std::string message;
};

void emit(const std::string& file, const std::vector<Diag>& diags, bool as_json, std::ostream& err) {
    if (as_json) {
        Json list = Json::array();
        for (const auto& d : diags)
            list.push_back({{"code", d.code},
                            {"line", d.span.line},
                            {"column", d.span.column},
                            {"length", d.span.length},
                            {"message", d.message}});
        err << Json{{"file", file}, {"diagnostics", list}}.dump() << '\n';
        return;
    }
    for (const auto& d : diags)
        err << file << ':' << d.span.line << ':' << d.span.column << ": error[" << d.code << "]: " << d.message << '\n';
}

}  // namespace

int compile_command(const std::string& source_path, const std::string& out_path, bool diag_json, std::ostream& err) {
    const auto source = slurp(source_path);
    if (!source) {
        err << "error: cannot read " << source_path << '\n';
        return kExitInput;
    }
    std::vector<Diag> diags;
    std::string ttg;
    try {
        ttg = ir::serialize(ir::compile_source(*source));
    } catch (const dsl::LexError& e) {
        diags.push_back({"LexError", e.span, e.what()});
    } catch (const dsl::ParseError& e) {
        diags.push_back({"ParseError", e.span, e.what()});
    } catch (const dsl::ValidationError& e) {
        for (const auto& d : e.diagnostics) diags.push_back({std::string(dsl::diag_code_name(d.code)), d.span, d.message});
    } catch (const ir::LoweringError& e) {
        diags.push_back({"LoweringError", e.span, e.what()});
    }
    if (!diags.empty()) {
        emit(source_path, diags, diag_json, err);
        return kExitDiagnostics;
    }
    if (!write_file(out_path, ttg + "\n")) {
        err << "error: cannot write " << out_path << '\n';
        return kExitInput;
    }
    return kExitOk;
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> parse_seed_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos || dots == 0 || dots + 2 >= text.size()) return std::nullopt;
    const auto a = text.substr(0, dots), b = text.substr(dots + 2);
    auto digits = [](const std::string& s) { return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }); };
    if (!digits(a) || !digits(b) || a.size() > 19 || b.size() > 19) return std::nullopt;
    const std::uint64_t lo = std::stoull(a), hi = std::stoull(b);
    if (lo > hi) return std::nullopt;
    return std::pair{lo, hi};
}

std::string per_seed_path(const std::string& path, std::uint64_t seed) {
    std::filesystem::path p(path);
    const auto ext = p.extension().string();
    p.replace_extension();
    return p.string() + ".seed" + std::to_string(seed) + ext;
}

int simulate_command(const SimulateOptions& o, std::ostream& err) {
    const auto until = parse_duration(o.until);
    if (!until || until->ns() <= 0) {
        err << "error: --until needs a positive duration such as 5s, got '" << o.until << "'\n";
        return kExitInput;
    }
    sim::Scenario scenario;
    try {
        scenario = load_scenario_file(o.scenario_path);
    } catch (const sim::ScenarioError& e) {
        err << "error: " << o.scenario_path << ": " << e.what() << '\n';
        return kExitInput;
    }
    const auto text = slurp(o.graph_path);
    if (!text) {
        err << "error: cannot read " << o.graph_path << '\n';
        return kExitInput;
    }
    ir::DataflowGraph graph;
    try {
        std::set<std::string> clocks;
        for (const auto& [id, c] : scenario.registry.reference_clocks) clocks.insert(id);
        graph = ir::deserialize(*text, &clocks);
    } catch (const ir::DeserializeError& e) {
        err << "error: " << o.graph_path << ": " << e.what() << '\n';
        return kExitInput;
    }

    std::vector<std::uint64_t> seeds;
    if (o.seeds)
        for (std::uint64_t s = o.seeds->first;; ++s) {
            seeds.push_back(s);
            if (s == o.seeds->second) break;
        }
    else
        seeds.push_back(o.seed);
    const bool sweep = o.seeds.has_value();

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    int status = kExitOk;
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            const auto seed = seeds[i];
            int code = kExitOk;
            std::string message;
            try {
                const auto r = sim::run(scenario, graph, seed, until->ns());
                for (const auto& t : r.rejected) message += "warning: tenant " + t + " was not admitted\n";
                if (o.trace_path) {
                    const auto path = sweep ? per_seed_path(*o.trace_path, seed) : *o.trace_path;
                    if (!write_file(path, r.trace.to_jsonl())) throw std::runtime_error("cannot write " + path);
                }
                if (o.metrics_path) {
                    const auto path = sweep ? per_seed_path(*o.metrics_path, seed) : *o.metrics_path;
                    if (!write_file(path, r.metrics.to_json().dump(2) + "\n"))
                        throw std::runtime_error("cannot write " + path);
                }
            } catch (const rtm::NoFeasiblePlacement& e) {
                code = kExitInfeasible, message = std::string("error: ") + e.what() + "\n";
            } catch (const sim::PlacementCapabilityError& e) {
                code = kExitInfeasible, message = std::string("error: ") + e.what() + "\n";
            } catch (const sim::OverrunError& e) {
                code = kExitInfeasible, message = std::string("error: ") + e.what() + "\n";
            } catch (const std::exception& e) {
                code = kExitInput, message = std::string("error: ") + e.what() + "\n";
            }
            std::lock_guard lock(mu);
            if (!message.empty()) err << (sweep ? "seed " + std::to_string(seed) + ": " : "") << message;
            status = std::max(status, code);
        }
    };
    unsigned n = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, seeds.size()));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    }
    return status;
}

int report_command(const std::vector<std::string>& paths, std::ostream& out, std::ostream& err) {
    if (paths.empty()) {
        err << "usage: ticktalk report METRICS.json...\n";
        return kExitInput;
    }
    std::vector<sim::MetricsSummary> rows;
    std::set<std::string> groups;
    for (const auto& p : paths) {
        const auto text = slurp(p);
        if (!text) {
            err << "error: cannot read " << p << '\n';
            return kExitInput;
        }
        try {
            rows.push_back(sim::summarize_metrics(sim::Json::parse(*text)));
        } catch (const std::exception& e) {
            err << "error: " << p << ": " << e.what() << '\n';
            return kExitInput;
        }
        for (const auto& [g, v] : rows.back().max_spread_by_group) groups.insert(g);
    }
    out << "seed";
    for (const auto& g : groups) out << ",max_spread_ns:" << g;
    out << ",latency_violations,total_energy_nj,sync_events\n";
    for (const auto& r : rows) {
        out << r.seed;
        for (const auto& g : groups) {
            out << ',';
            if (auto it = r.max_spread_by_group.find(g); it != r.max_spread_by_group.end()) out << it->second;
        }
        out << ',' << r.violations << ',' << r.total_energy_nj << ',' << r.sync_events << '\n';
    }
    return kExitOk;
}

}  // namespace ticktalk::cli
