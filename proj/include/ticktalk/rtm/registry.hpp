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
#include <set>
#include <string>
#include <utility>

#include "ticktalk/clocks/clock.hpp"
#include "ticktalk/sim/ensemble.hpp"
#include "ticktalk/sim/link.hpp"

namespace ticktalk::rtm {

class RegistryError : public Error {
public:
    using Error::Error;
};

struct Registry {
    std::map<std::string, sim::Ensemble> ensembles;
    std::map<std::string, clocks::ReferenceClock> reference_clocks;
    std::map<std::string, clocks::LocalClock> local_clocks;
    std::map<std::string, sim::NetworkLink> links;
    std::map<std::string, clocks::PowerModel> power_models;
    /// Unordered pairs of reference clocks sharing a frequency standard.
    std::set<std::pair<std::string, std::string>> syntonizable;
    std::optional<std::string> leader;

    void add_syntonizable(const std::string& a, const std::string& b);
    bool syntonizable_pair(const std::string& a, const std::string& b) const;

    std::string admin_domain(const std::string& ensemble) const;

    /// True when the ensemble's clock is the reference clock `reference`.
    bool hosts_reference(const std::string& ensemble, const std::string& reference) const;

    /// Throws RegistryError naming the first dangling reference.
    void check() const;
};

}  // namespace ticktalk::rtm
