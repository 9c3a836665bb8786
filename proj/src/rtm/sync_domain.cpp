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

#include "ticktalk/rtm/rtm.hpp"

namespace ticktalk::rtm {

PrecisionUnachievable::PrecisionUnachievable(std::string m, Nanos floor, const std::string& why)
    : Error("precision unachievable for " + m + ": " + why), member(std::move(m)), floor_ns(floor) {}

MemberLinkDown::MemberLinkDown(std::string m) : Error("link down for " + m), member(std::move(m)) {}

Nanos token_validity(double residual_rate_ppm, Nanos precision_ns, Nanos achieved_ns) {
    if (achieved_ns >= precision_ns) return 0;
    const auto interval = clocks::required_resync_interval(residual_rate_ppm, precision_ns - achieved_ns);
    return interval ? *interval : std::numeric_limits<Nanos>::max();
}

namespace {

Nanos saturating_add(Nanos a, Nanos b) {
    return b > std::numeric_limits<Nanos>::max() - a ? std::numeric_limits<Nanos>::max() : a + b;
}

}  // namespace

MemberSync sync_member(const std::string& member, clocks::LocalClock& clock, const clocks::ReferenceClock& reference,
                       Nanos precision_ns, const sim::NetworkLink& link, const clocks::PowerModel& power,
                       const clocks::SyncParams& params, clocks::SyncNoise noise, Nanos now, int attempts,
                       Nanos hold_until) {
    MemberSync out;
    Nanos t = now;
    for (int a = 0; a < std::max(1, attempts); ++a) {
        clocks::SyncResult r;
        try {
            r = clocks::sync(clock, reference, precision_ns, link, power, params, noise, t);
        } catch (const clocks::UnachievablePrecision& e) {
            throw PrecisionUnachievable(member, e.floor_ns, e.what());
        } catch (const clocks::LinkDown&) {
            throw MemberLinkDown(member);
        }
        out.attempts.push_back(r);
        t = r.completed_at_true_ns;
        if (r.achieved_precision_ns <= precision_ns) {
            out.completed_at_true_ns = t;
            const Nanos validity = token_validity(r.residual_rate_ppm, precision_ns, r.achieved_precision_ns);
            out.token = {r.achieved_precision_ns, saturating_add(t, validity)};
            if (out.token.expires_at_ns >= hold_until || a + 1 == std::max(1, attempts)) return out;
        }
    }
    throw PrecisionUnachievable(member, out.attempts.back().achieved_precision_ns,
                                "achieved " + std::to_string(out.attempts.back().achieved_precision_ns) + " ns after " +
                                    std::to_string(out.attempts.size()) + " attempts");
}

DomainResult establish_sync_domain(const std::vector<std::string>& members, const std::string& reference,
                                   Nanos precision_ns, std::map<std::string, clocks::LocalClock>& member_clocks,
                                   const Registry& registry, const clocks::SyncParams& params, std::uint64_t seed,
                                   Nanos now) {
    if (members.empty()) throw Error("a sync domain needs at least one member");
    if (precision_ns <= 0) throw Error("sync precision must be positive");
    const auto ref_it = registry.reference_clocks.find(reference);
    if (ref_it == registry.reference_clocks.end()) throw RegistryError("unknown reference clock " + reference);
    const auto& ref = ref_it->second;

    DomainResult out;
    auto staged = member_clocks;
    Nanos validity = std::numeric_limits<Nanos>::max();
    for (const auto& m : members) {
        const auto e = registry.ensembles.find(m);
        if (e == registry.ensembles.end()) throw RegistryError("unknown ensemble " + m);
        MemberSync ms;
        if (registry.hosts_reference(m, reference)) {
            ms.self_sync = true;
            ms.completed_at_true_ns = now;
            ms.token = {0, std::numeric_limits<Nanos>::max()};
        } else {
            auto clock = staged.find(m);
            if (clock == staged.end()) throw RegistryError("no clock state for member " + m);
            Stream link_noise(seed, "sync/" + m + "/link");
            Stream local_noise(seed, "sync/" + m + "/read");
            Stream ref_noise(seed, "sync/" + m + "/reference");
            ms = sync_member(m, clock->second, ref, precision_ns, registry.links.at(e->second.link),
                             registry.power_models.at(e->second.power), params,
                             {&link_noise, &local_noise, &ref_noise}, now);
        }
        if (ms.token.expires_at_ns != std::numeric_limits<Nanos>::max())
            validity = std::min(validity, ms.token.expires_at_ns - ms.completed_at_true_ns);
        out.tokens[m] = ms.token;
        out.syncs[m] = std::move(ms);
    }
    member_clocks = std::move(staged);
    auto sorted = members;
    std::sort(sorted.begin(), sorted.end());
    out.domain = {reference + "@" + std::to_string(now), sorted, reference, precision_ns, now, validity};
    return out;
}

}  // namespace ticktalk::rtm
