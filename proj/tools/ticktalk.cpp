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


// Command-line front end: compile, simulate, report.

#include <iostream>

#include "CLI11.hpp"
#include "ticktalk/cli/commands.hpp"

using namespace ticktalk::cli;

int main(int argc, char** argv) {
    CLI::App app{"TickTalk compiler and timing simulator"};
    app.require_subcommand(0, 1);

    auto* compile = app.add_subcommand("compile", "Compile a .tt program to a .ttg dataflow graph");
    std::string source, out;
    bool diag_json = false;
    compile->add_option("source", source, "Program source (.tt)")->required();
    compile->add_option("out", out, "Graph output (.ttg)")->required();
    compile->add_flag("--diag-json", diag_json, "Print diagnostics as JSON");

    auto* simulate = app.add_subcommand("simulate", "Run a graph against a scenario");
    SimulateOptions sim;
    std::string seeds;
    std::string trace, metrics;
    simulate->add_option("graph", sim.graph_path, "Compiled graph (.ttg)")->required();
    simulate->add_option("scenario", sim.scenario_path, "Scenario (.json)")->required();
    auto* seed_opt = simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--seeds", seeds, "Inclusive seed range A..B, one run per seed")->excludes(seed_opt);
    simulate->add_option("--until", sim.until, "Simulated horizon, e.g. 5s")->required();
    simulate->add_option("--trace", trace, "JSON-Lines trace output");
    simulate->add_option("--metrics", metrics, "Metrics JSON output");

    auto* report = app.add_subcommand("report", "Summarize metrics files as CSV");
    std::vector<std::string> metric_files;
    report->add_option("metrics", metric_files, "Metrics files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (*compile) return compile_command(source, out, diag_json, std::cerr);
    if (*simulate) {
        if (!seeds.empty()) {
            sim.seeds = parse_seed_range(seeds);
            if (!sim.seeds) {
                std::cerr << "error: --seeds expects A..B with A <= B\n";
                return kExitInput;
            }
        }
        if (!trace.empty()) sim.trace_path = trace;
        if (!metrics.empty()) sim.metrics_path = metrics;
        return simulate_command(sim, std::cerr);
    }
    if (*report) return report_command(metric_files, std::cout, std::cerr);
    std::cerr << app.help();
    return kExitInput;
}
