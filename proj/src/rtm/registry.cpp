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


#include "ticktalk/rtm/registry.hpp"

namespace ticktalk::rtm {

void Registry::add_syntonizable(const std::string& a, const std::string& b) {
    syntonizable.insert(a < b ? std::pair{a, b} : std::pair{b, a});
}

bool Registry::syntonizable_pair(const std::string& a, const std::string& b) const {
    return syntonizable.count(a < b ? std::pair{a, b} : std::pair{b, a}) > 0;
}

std::string Registry::admin_domain(const std::string& ensemble) const {
    auto it = ensembles.find(ensemble);
    return it == ensembles.end() ? std::string{} : it->second.admin_domain;
}

bool Registry::hosts_reference(const std::string& ensemble, const std::string& reference) const {
    auto it = ensembles.find(ensemble);
    return it != ensembles.end() && it->second.clock == reference && reference_clocks.count(reference);
}

void Registry::check() const {
    for (const auto& [id, c] : reference_clocks) c.check();
    for (const auto& [id, c] : local_clocks) {
        c.check();
        if (c.bound_reference && !reference_clocks.count(*c.bound_reference))
            throw RegistryError("local clock " + id + " is bound to unknown reference " + *c.bound_reference);
    }
    for (const auto& [id, l] : links) l.check();
    for (const auto& [id, p] : power_models) p.check();
    for (const auto& [id, e] : ensembles) {
        e.check();
        if (!local_clocks.count(e.clock) && !reference_clocks.count(e.clock))
            throw RegistryError("ensemble " + id + " uses unknown clock " + e.clock);
        if (!power_models.count(e.power)) throw RegistryError("ensemble " + id + " uses unknown power model " + e.power);
        if (!links.count(e.link)) throw RegistryError("ensemble " + id + " uses unknown link " + e.link);
    }
    for (const auto& [a, b] : syntonizable) {
        if (!reference_clocks.count(a) || !reference_clocks.count(b))
            throw RegistryError("syntonizable pair " + a + "/" + b + " names an unknown reference clock");
    }
    if (leader && !ensembles.count(*leader)) throw RegistryError("leader " + *leader + " is not an ensemble");
}

}  // namespace ticktalk::rtm
