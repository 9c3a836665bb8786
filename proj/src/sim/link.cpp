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


#include "ticktalk/sim/link.hpp"

#include <algorithm>
#include <cmath>

namespace ticktalk::sim {

void NetworkLink::check() const {
    if (latency_min_ns < 0) throw Error("link " + id + ": latency_min must be non-negative");
    if (latency_mode_ns < latency_min_ns) throw Error("link " + id + ": latency_mode must be at least latency_min");
    if (!(latency_jitter_std_ns >= 0)) throw Error("link " + id + ": jitter must be non-negative");
    if (asymmetry_ns < 0) throw Error("link " + id + ": asymmetry must be non-negative");
}

Nanos sample_latency(const NetworkLink& link, Stream& noise) {
    if (link.latency_jitter_std_ns == 0) return link.latency_mode_ns;
    constexpr double s = kLatencyLogSigma;
    static const double lognormal_std = std::sqrt((std::exp(s * s) - 1.0) * std::exp(s * s));
    const double shape = (std::exp(s * noise.normal()) - std::exp(-s * s)) / lognormal_std;
    const double v = static_cast<double>(link.latency_mode_ns) + link.latency_jitter_std_ns * shape;
    return std::max(link.latency_min_ns, static_cast<Nanos>(std::llround(v)));
}

}  // namespace ticktalk::sim
