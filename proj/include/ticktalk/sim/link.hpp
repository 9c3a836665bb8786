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

#include "ticktalk/common.hpp"
#include "ticktalk/rng.hpp"

namespace ticktalk::sim {

struct NetworkLink {
    std::string id;
    Nanos latency_min_ns = 0;
    Nanos latency_mode_ns = 0;
    double latency_jitter_std_ns = 0;
    /// Extra one-way delay on the forward (member to reference) direction.
    Nanos asymmetry_ns = 0;
    bool up = true;

    /// Throws Error when mode < min, min < 0, jitter < 0 or asymmetry < 0.
    void check() const;
};

/// Shape of the latency tail: the log-space standard deviation of the
/// shifted lognormal.
inline constexpr double kLatencyLogSigma = 0.5;

/// One-way latency sample. The lognormal is shifted and scaled so its mode
/// lands on latency_mode_ns and its standard deviation equals the jitter;
/// samples are truncated below at latency_min_ns. Zero jitter yields the
/// mode exactly.
Nanos sample_latency(const NetworkLink& link, Stream& noise);

}  // namespace ticktalk::sim
