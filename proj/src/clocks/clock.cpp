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


#include "ticktalk/clocks/clock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ticktalk::clocks {

UnachievablePrecision::UnachievablePrecision(Nanos floor)
    : ClockError("precision unachievable: link asymmetry floor is " + std::to_string(floor) + " ns"),
      floor_ns(floor) {}

LinkDown::LinkDown(const std::string& link_id) : ClockError("link " + link_id + " is down") {}

TooLate::TooLate(Nanos wake_at, Nanos now)
    : ClockError("wake time " + std::to_string(wake_at) + " ns is already past (clock reads " + std::to_string(now) +
                 " ns)"),
      wake_at_ns(wake_at),
      now_ns(now) {}

void ReferenceClock::check() const {
    if (!(std::abs(freq_error_ppm) <= 1e4)) throw ClockError("reference clock " + id + ": |freq_error_ppm| > 10^4");
    if (!(jitter_std_ns >= 0)) throw ClockError("reference clock " + id + ": negative jitter");
}

double LocalClock::effective_jitter_std() const {
    return precision_mode == PrecisionMode::High ? jitter_std_ns / high_precision_factor : jitter_std_ns;
}

void LocalClock::check() const {
    if (!(std::abs(drift_ppm) <= 1e4)) throw ClockError("local clock " + id + ": |drift_ppm| > 10^4");
    if (!(jitter_std_ns >= 0)) throw ClockError("local clock " + id + ": negative jitter");
    if (!(high_precision_factor >= 1)) throw ClockError("local clock " + id + ": high_precision_factor < 1");
}

Affine affine_of(const ReferenceClock& c) {
    return {1.0L + static_cast<long double>(c.freq_error_ppm) * 1e-6L,
            static_cast<long double>(c.epoch_ns) + static_cast<long double>(c.phase_offset_ns)};
}

Affine affine_of(const LocalClock& c) {
    const long double ppm = static_cast<long double>(c.drift_ppm) + c.correction.rate_correction_ppm;
    return {1.0L + ppm * 1e-6L, static_cast<long double>(c.epoch_ns) + static_cast<long double>(c.init_offset_ns) +
                                    c.correction.offset_correction_ns};
}

long double ideal_read(const ReferenceClock& c, Nanos t) { return affine_of(c).at(static_cast<long double>(t)); }
long double ideal_read(const LocalClock& c, Nanos t) { return affine_of(c).at(static_cast<long double>(t)); }

namespace {

Nanos rounded(long double v) { return static_cast<Nanos>(std::llroundl(v)); }

Nanos noisy_read(long double ideal, double jitter_std, Stream* noise) {
    if (noise && jitter_std > 0) ideal += static_cast<long double>(jitter_std * noise->normal());
    return rounded(ideal);
}

}  // namespace

Nanos read(const ReferenceClock& c, Nanos t, Stream* noise) {
    return noisy_read(ideal_read(c, t), c.jitter_std_ns, noise);
}

Nanos read(const LocalClock& c, Nanos t, Stream* noise) {
    return noisy_read(ideal_read(c, t), c.effective_jitter_std(), noise);
}

Nanos true_time_at(const Affine& clock, Nanos clock_time) {
    auto t = static_cast<Nanos>(std::ceil(clock.inverse(static_cast<long double>(clock_time))));
    const auto reading = [&](Nanos x) { return clock.at(static_cast<long double>(x)); };
    const auto target = static_cast<long double>(clock_time);
    while (reading(t) < target) ++t;
    while (reading(t - 1) >= target) --t;
    return t;
}

void PowerModel::check() const {
    if (p_sleep_nw < 0 || p_idle_nw < 0 || p_highclock_extra_nw < 0 || e_exchange_nj < 0 || e_radio_wake_nj < 0)
        throw ClockError("power model " + id + ": all terms must be non-negative");
}

long double asymmetry_floor(Nanos asymmetry_ns) { return static_cast<long double>(asymmetry_ns) / 2; }

double round_error_std(const sim::NetworkLink& link, const LocalClock& local, const ReferenceClock& reference) {
    // Offset estimate ((T1-T2) + (T4-T3)) / 2: two delay samples and four
    // reads, each entering with weight 1/2.
    const double l = link.latency_jitter_std_ns;
    const double a = local.effective_jitter_std();
    const double r = reference.jitter_std_ns;
    return std::sqrt((2 * l * l + 2 * a * a + 2 * r * r) / 4);
}

int rounds_needed(Nanos target, Nanos asymmetry_ns, double round_std, const SyncParams& params) {
    const long double floor = asymmetry_floor(asymmetry_ns);
    if (static_cast<long double>(target) < floor) throw UnachievablePrecision(static_cast<Nanos>(std::ceil(floor)));
    if (round_std == 0) return 1;
    const long double slack = static_cast<long double>(target) - floor;
    for (int n = 1; n < params.max_rounds; ++n)
        if (params.z * round_std / std::sqrt(static_cast<long double>(n)) <= slack) return n;
    return params.max_rounds;
}

std::int64_t sync_energy(const PowerModel& power, int rounds) {
    return power.e_radio_wake_nj + rounds * power.e_exchange_nj;
}

SyncResult sync(LocalClock& local, const ReferenceClock& reference, Nanos target, const sim::NetworkLink& link,
                const PowerModel& power, const SyncParams& params, SyncNoise noise, Nanos now) {
    if (target <= 0) throw ClockError("sync target precision must be positive");
    if (!link.up) throw LinkDown(link.id);
    const double sigma = round_error_std(link, local, reference);
    const int n = rounds_needed(target, link.asymmetry_ns, sigma, params);

    Stream unused;
    if (link.latency_jitter_std_ns > 0 && !noise.link) throw ClockError("sync over a jittery link needs a noise stream");
    Stream& link_noise = noise.link ? *noise.link : unused;
    const auto sample = [&]() -> long double { return static_cast<long double>(sim::sample_latency(link, link_noise)); };
    const auto jitter = [](Stream* s, double std) -> long double {
        return s && std > 0 ? static_cast<long double>(std * s->normal()) : 0.0L;
    };

    long double error_sum = 0;
    long double elapsed = 0;
    const double local_std = local.effective_jitter_std();
    for (int i = 0; i < n; ++i) {
        const long double forward = sample() + static_cast<long double>(link.asymmetry_ns);
        const long double backward = sample();
        const long double j1 = jitter(noise.local_read, local_std);
        const long double j2 = jitter(noise.reference_read, reference.jitter_std_ns);
        const long double j3 = jitter(noise.reference_read, reference.jitter_std_ns);
        const long double j4 = jitter(noise.local_read, local_std);
        error_sum += (backward - forward) / 2 + (j1 - j2 + j4 - j3) / 2;
        elapsed += forward + backward;
    }
    const long double mean_error = error_sum / n;
    const Nanos done = now + static_cast<Nanos>(std::llroundl(elapsed));

    const long double theta = ideal_read(local, done) - ideal_read(reference, done);
    const long double estimate = theta + mean_error;

    Correction& c = local.correction;
    if (local.last_sync_true_ns && done - *local.last_sync_true_ns >= params.min_rate_baseline_ns) {
        // The previous sync left the believed offset at zero, so the whole
        // estimate is drift accumulated since then.
        const long double dt = static_cast<long double>(done - *local.last_sync_true_ns);
        const long double delta_ppm = -estimate / dt * 1e6L;
        c.rate_correction_ppm += static_cast<double>(delta_ppm);
        c.offset_correction_ns -= delta_ppm * 1e-6L * static_cast<long double>(done);
    }
    c.offset_correction_ns -= estimate;
    c.applied_at_true_ns = done;

    SyncResult r;
    r.rounds = n;
    r.started_at_true_ns = now;
    r.completed_at_true_ns = done;
    r.residual_ns = ideal_read(local, done) - ideal_read(reference, done);
    r.residual_rate_ppm = static_cast<double>((affine_of(local).rate - affine_of(reference).rate) * 1e6L);
    const long double bound = asymmetry_floor(link.asymmetry_ns) + params.z * sigma / std::sqrt((long double)n);
    r.achieved_precision_ns =
        std::max(static_cast<Nanos>(std::ceil(bound)), static_cast<Nanos>(std::ceil(std::fabs(r.residual_ns))));
    r.energy_nj = sync_energy(power, n);
    r.correction = c;

    local.last_sync_true_ns = done;
    local.last_achieved_ns = r.achieved_precision_ns;
    local.residual_rate_ppm = r.residual_rate_ppm;
    return r;
}

std::optional<Nanos> required_resync_interval(double drift_ppm, Nanos precision_ns) {
    if (precision_ns <= 0) throw ClockError("precision must be positive");
    if (drift_ppm == 0) return std::nullopt;
    const long double v =
        std::floor(static_cast<long double>(precision_ns) * 1e6L / std::fabs(static_cast<long double>(drift_ppm)));
    if (v >= static_cast<long double>(std::numeric_limits<Nanos>::max())) return std::nullopt;
    return static_cast<Nanos>(v);
}

Nanos wakeup_plan(Nanos scheduled, Nanos overhead, Nanos uncertainty, Nanos guard, Nanos now) {
    if (overhead < 0 || uncertainty < 0 || guard < 0) throw ClockError("wakeup lead terms must be non-negative");
    const Nanos wake = scheduled - overhead - uncertainty - guard;
    if (wake < now) throw TooLate(wake, now);
    return wake;
}

std::int64_t energy_of_schedule(const PowerModel& power, const std::vector<TimelineEntry>& timeline) {
    std::vector<ModeInterval> intervals;
    __int128 total = 0;  // nanowatt-nanoseconds
    constexpr __int128 kUnitsPerNj = 1'000'000'000;
    for (const auto& e : timeline) {
        if (const auto* m = std::get_if<ModeInterval>(&e)) {
            if (m->end_ns < m->start_ns) throw ClockError("interval ends before it starts");
            intervals.push_back(*m);
        } else {
            const auto& s = std::get<SyncEvent>(e);
            if (s.rounds < 1) throw ClockError("sync event needs at least one round");
            total += static_cast<__int128>(sync_energy(power, s.rounds)) * kUnitsPerNj;
        }
    }
    std::sort(intervals.begin(), intervals.end(),
              [](const ModeInterval& a, const ModeInterval& b) { return a.start_ns < b.start_ns; });
    Nanos cursor = 0;
    for (const auto& m : intervals) {
        if (m.start_ns < cursor) throw OverlapError("intervals overlap at " + std::to_string(m.start_ns) + " ns");
        if (m.start_ns > cursor) throw ClockError("timeline gap at " + std::to_string(cursor) + " ns");
        std::int64_t p = m.state == PowerState::Sleep ? power.p_sleep_nw : power.p_idle_nw;
        if (m.high_precision) p += power.p_highclock_extra_nw;
        total += static_cast<__int128>(p) * (m.end_ns - m.start_ns);
        cursor = m.end_ns;
    }
    return static_cast<std::int64_t>((total + kUnitsPerNj / 2) / kUnitsPerNj);
}

Nanos current_uncertainty(const LocalClock& c, Nanos t, Nanos unsynced_ns) {
    if (!c.last_sync_true_ns) return unsynced_ns;
    const long double grown =
        std::fabs(static_cast<long double>(c.residual_rate_ppm)) * 1e-6L * static_cast<long double>(t - *c.last_sync_true_ns);
    return c.last_achieved_ns + static_cast<Nanos>(std::ceil(std::max(0.0L, grown)));
}

namespace {

Affine affine_any(AnyClock c) {
    return std::visit([](auto* p) { return affine_of(*p); }, c);
}

Nanos uncertainty_any(AnyClock c, Nanos t, Nanos unsynced) {
    if (const auto* l = std::get_if<const LocalClock*>(&c)) return current_uncertainty(**l, t, unsynced);
    return 0;
}

}  // namespace

Converted convert(Nanos ts, AnyClock from, AnyClock to, Nanos at, Nanos unsynced_ns) {
    if (from == to) return {ts, 0};
    const long double t = affine_any(from).inverse(static_cast<long double>(ts));
    return {rounded(affine_any(to).at(t)), uncertainty_any(from, at, unsynced_ns) + uncertainty_any(to, at, unsynced_ns)};
}

}  // namespace ticktalk::clocks
