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

#include <string>

#include "corpus.hpp"
#include "ticktalk/cli/scenario_json.hpp"
#include "ticktalk/rtm/registry.hpp"

namespace fixtures {

inline ticktalk::sim::Scenario scenario(const std::string& name) {
    return ticktalk::cli::load_scenario_file((ticktalk::testing::source_dir() / "scenarios" / name).string());
}

inline ticktalk::sim::Scenario truck() { return scenario("truck.json"); }

/// Minimal registry: one ideal reference "ref", one link, one power model.
inline ticktalk::rtm::Registry base_registry(ticktalk::Nanos link_mode = 2'000'000, ticktalk::Nanos asym = 0) {
    using namespace ticktalk;
    rtm::Registry r;
    r.reference_clocks["ref"] = clocks::ReferenceClock{"ref", 0, 0, 0, 0};
    sim::NetworkLink l;
    l.id = "L";
    l.latency_min_ns = link_mode / 2;
    l.latency_mode_ns = link_mode;
    l.asymmetry_ns = asym;
    r.links["L"] = l;
    r.power_models["P"] = clocks::PowerModel{"P", 10, 1'000, 500, 2'000, 50'000};
    return r;
}

/// Adds an ensemble with its own local clock "<id>.osc".
inline void add_ensemble(ticktalk::rtm::Registry& r, const std::string& id, ticktalk::sim::Position at,
                         std::set<std::string> caps, double drift_ppm = 0, const std::string& link = "L") {
    using namespace ticktalk;
    clocks::LocalClock c;
    c.id = id + ".osc";
    c.owner = id;
    c.drift_ppm = drift_ppm;
    r.local_clocks[c.id] = c;
    sim::Ensemble e;
    e.id = id;
    e.position = at;
    e.capabilities = std::move(caps);
    e.clock = c.id;
    e.power = "P";
    e.link = link;
    r.ensembles[id] = e;
}

}  // namespace fixtures
