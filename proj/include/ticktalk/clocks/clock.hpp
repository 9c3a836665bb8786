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

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ticktalk/common.hpp"
#include "ticktalk/rng.hpp"
#include "ticktalk/sim/link.hpp"

namespace ticktalk::clocks {

class ClockError : public Error {
public:
    using Error::Error;
};

class UnachievablePrecision : public ClockError {
public:
    explicit UnachievablePrecision(Nanos floor);
    Nanos floor_ns;
};

class LinkDown : public ClockError {
public:
    explicit LinkDown(const std::string& link_id);
};

class TooLate : public ClockError {
public:
    TooLate(Nanos wake_at, Nanos now);
    Nanos wake_at_ns;
    Nanos now_ns;
};

class OverlapError : public ClockError {
public:
    using ClockError::ClockError;
};

struct ReferenceClock {
    std::string id;
    double freq_error_ppm = 0;
    Nanos phase_offset_ns = 0;
    Nanos epoch_ns = 0;
    double jitter_std_ns = 0;

    void check() const;
};

enum class PrecisionMode { Low, High };

/// Cumulative correction. Rate changes are folded into the offset so that
/// the clock stays continuous at the instant a correction is applied.
struct Correction {
    Nanos applied_at_true_ns = 0;
    long double offset_correction_ns = 0;
    double rate_correction_ppm = 0;

    friend bool operator==(const Correction&, const Correction&) = default;
};

struct LocalClock {
    std::string id;
    std::string owner;
    double drift_ppm = 0;
    Nanos init_offset_ns = 0;
    double jitter_std_ns = 0;
    Nanos epoch_ns = 0;
    Correction correction;
    PrecisionMode precision_mode = PrecisionMode::Low;
    double high_precision_factor = 10;
    std::optional<std::string> bound_reference;

    // Bookkeeping from the latest successful sync.
    std::optional<Nanos> last_sync_true_ns;
    Nanos last_achieved_ns = 0;
    /// Rate of |local - reference| growth after the latest sync, in ppm.
    double residual_rate_ppm = 0;

    /// Configured jitter, divided by the high-precision factor in High mode.
    double effective_jitter_std() const;
    void check() const;
};

/// clock(t) = offset + rate * t, jitter excluded.
struct Affine {
    long double rate = 1;
    long double offset = 0;

    long double at(long double t) const { return offset + rate * t; }
    long double inverse(long double reading) const { return (reading - offset) / rate; }
};

Affine affine_of(const ReferenceClock& c);
Affine affine_of(const LocalClock& c);

/// Deterministic reading, jitter excluded, before rounding.
long double ideal_read(const ReferenceClock& c, Nanos true_time_ns);
long double ideal_read(const LocalClock& c, Nanos true_time_ns);

/// Clock reading at a true instant, rounded to integer ns. When `noise` is
/// given and the clock has jitter, one Gaussian sample is added; pass the
/// clock's own stream so that the sample is keyed by (clock, read index).
Nanos read(const ReferenceClock& c, Nanos true_time_ns, Stream* noise = nullptr);
Nanos read(const LocalClock& c, Nanos true_time_ns, Stream* noise = nullptr);

/// First integer true instant at which the clock's deterministic reading
/// reaches `clock_time`.
Nanos true_time_at(const Affine& clock, Nanos clock_time);

struct PowerModel {
    std::string id;
    std::int64_t p_sleep_nw = 0;
    std::int64_t p_idle_nw = 0;
    std::int64_t p_highclock_extra_nw = 0;
    std::int64_t e_exchange_nj = 0;
    std::int64_t e_radio_wake_nj = 0;

    void check() const;
};

struct SyncParams {
    int max_rounds = 32;
    /// Width of the per-round statistical error bound in standard deviations.
    double z = 3.0;
    /// Rate corrections are estimated only over sync gaps at least this long;
    /// over shorter gaps the offset noise would dominate the estimate.
    Nanos min_rate_baseline_ns = kNanosPerSecond;
};

struct SyncResult {
    Nanos achieved_precision_ns = 0;
    std::int64_t energy_nj = 0;
    int rounds = 0;
    Correction correction;
    Nanos started_at_true_ns = 0;
    Nanos completed_at_true_ns = 0;
    /// local - reference right after the correction, deterministic part.
    long double residual_ns = 0;
    double residual_rate_ppm = 0;
};

/// Error floor of a two-way exchange over a link with the given asymmetry.
long double asymmetry_floor(Nanos asymmetry_ns);

/// Standard deviation of one round's offset-estimate error.
double round_error_std(const sim::NetworkLink& link, const LocalClock& local, const ReferenceClock& reference);

/// Rounds needed for floor + z * sigma / sqrt(n) <= target, capped at
/// max_rounds. Throws UnachievablePrecision when target < floor.
int rounds_needed(Nanos target_precision_ns, Nanos asymmetry_ns, double round_std, const SyncParams& params);

/// Noise sources a sync draws from: link delays and both sides' read jitter.
struct SyncNoise {
    Stream* link = nullptr;
    Stream* local_read = nullptr;
    Stream* reference_read = nullptr;
};

/// Two-way timestamp exchange starting at true time `now_true_ns`, repeated
/// until the error bound meets the target or max_rounds is reached, then
/// the correction is applied to `local` at the completion instant.
SyncResult sync(LocalClock& local, const ReferenceClock& reference, Nanos target_precision_ns,
                const sim::NetworkLink& link, const PowerModel& power, const SyncParams& params, SyncNoise noise,
                Nanos now_true_ns);

/// nullopt means Unbounded.
std::optional<Nanos> required_resync_interval(double drift_ppm, Nanos precision_ns);

/// Local-clock time to wake so that the node is up and resynced before the
/// scheduled instant. Throws TooLate when that time is before `now_clock_ns`.
Nanos wakeup_plan(Nanos scheduled_clock_time_ns, Nanos sync_overhead_ns, Nanos current_uncertainty_ns,
                  Nanos guard_band_ns, Nanos now_clock_ns);

enum class PowerState { Sleep, Idle };

struct ModeInterval {
    Nanos start_ns = 0;
    Nanos end_ns = 0;
    PowerState state = PowerState::Sleep;
    bool high_precision = false;
};

struct SyncEvent {
    int rounds = 0;
};

using TimelineEntry = std::variant<ModeInterval, SyncEvent>;

/// Energy in nanojoules, rounded to nearest. Intervals must not overlap
/// (OverlapError) and must tile [0, T] without gaps (ClockError).
std::int64_t energy_of_schedule(const PowerModel& power, const std::vector<TimelineEntry>& timeline);

/// Energy of one sync of `rounds` exchanges.
std::int64_t sync_energy(const PowerModel& power, int rounds);

/// Bound on |clock - its reference| at true time `t`; references are exact,
/// a never-synced local clock reports `unsynced_ns`.
Nanos current_uncertainty(const LocalClock& c, Nanos t, Nanos unsynced_ns);

using AnyClock = std::variant<const ReferenceClock*, const LocalClock*>;

struct Converted {
    Nanos timestamp_ns = 0;
    Nanos uncertainty_ns = 0;
};

/// Maps a reading of `from` to the reading `to` shows at the same true
/// instant, through the inverse of the affine model.
Converted convert(Nanos timestamp_ns, AnyClock from, AnyClock to, Nanos at_true_ns, Nanos unsynced_ns = 0);

}  // namespace ticktalk::clocks
