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
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "ticktalk/ir/lower.hpp"
#include "ticktalk/rtm/rtm.hpp"

using namespace ticktalk;
using namespace ticktalk::rtm;
using fixtures::add_ensemble;
using fixtures::base_registry;

namespace oracle {

// Membership by squared distance; no square roots involved.
std::vector<std::string> in_ball(const Registry& r, sim::Position c, double radius, const std::string& cap) {
    std::vector<std::string> out;
    for (const auto& [id, e] : r.ensembles) {
        const double dx = e.position.x_m - c.x_m, dy = e.position.y_m - c.y_m;
        if (dx * dx + dy * dy <= radius * radius && (cap.empty() || e.capabilities.count(cap))) out.push_back(id);
    }
    return out;
}

// Lays every window out as explicit intervals over two hyperperiods and
// looks for any intersection. Independent of the modular test in the code.
bool replay_overlaps(const std::vector<Window>& fixed, const Window& cand) {
    Nanos h = cand.period_ns;
    for (const auto& w : fixed) h = std::lcm(h, w.period_ns);
    auto intervals = [&](const Window& w) {
        std::vector<std::pair<Nanos, Nanos>> v;
        for (Nanos s = w.phase_ns % w.period_ns - w.period_ns; s < 2 * h; s += w.period_ns) v.push_back({s, s + w.width_ns});
        return v;
    };
    const auto mine = intervals(cand);
    for (const auto& w : fixed)
        for (const auto& [a0, a1] : intervals(w))
            for (const auto& [b0, b1] : mine)
                if (a0 < b1 && b0 < a1) return true;
    return false;
}

// First feasible phase on the gcd/G grid, or nullopt.
std::optional<Nanos> first_phase(const std::vector<Window>& fixed, Window cand, int G) {
    Nanos g = cand.period_ns;
    for (const auto& w : fixed) g = std::gcd(g, w.period_ns);
    const Nanos step = std::max<Nanos>(1, g / G);
    for (Nanos p = 0; p < cand.period_ns; p += step) {
        cand.phase_ns = p;
        if (!replay_overlaps(fixed, cand)) return p;
    }
    return std::nullopt;
}

}  // namespace oracle

namespace {

Registry cameras() {
    auto r = base_registry();
    add_ensemble(r, "cam1", {-60, 30}, {"captureImage"}, -50);
    add_ensemble(r, "cam2", {0, 40}, {"captureImage"}, -10);
    add_ensemble(r, "cam3", {40, -30}, {"captureImage"}, 20);
    add_ensemble(r, "cam4", {100, 20}, {"captureImage"}, 100);
    add_ensemble(r, "leader", {30, 0}, {"getSensors", "create3DImage", "addImage", "predictNextPosition"});
    r.leader = "leader";
    return r;
}

BlockRequest periodic(const std::string& tenant, Nanos period, Nanos width, const std::string& clock = "ref") {
    BlockRequest b;
    b.tenant = tenant;
    b.block_id = tenant + "/blk";
    b.op = "work";
    b.clock = clock;
    b.timing_bearing = true;
    b.window = Window{0, width, period};
    return b;
}

constexpr Nanos ms = kNanosPerMilli;

}  // namespace

TEST_SUITE("get_sensors") {
    TEST_CASE("closed ball boundary") {
        auto r = base_registry();
        add_ensemble(r, "near", {99.9, 0}, {"cam"});
        add_ensemble(r, "edge", {0, 100.0}, {"cam"});
        add_ensemble(r, "far", {100.001, 0}, {"cam"});
        add_ensemble(r, "other", {1, 1}, {"lidar"});
        CHECK(get_sensors(r, {0, 0}, 100, "cam") == std::vector<std::string>{"edge", "near"});
        CHECK(get_sensors(r, {0, 0}, 100, "") == std::vector<std::string>{"edge", "near", "other"});
    }
    TEST_CASE("empty registry") { CHECK(get_sensors(Registry{}, {0, 0}, 100, "cam").empty()); }
    TEST_CASE("matches the squared-distance oracle on random layouts") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-200, 200);
        for (int trial = 0; trial < 50; ++trial) {
            auto r = base_registry();
            for (int i = 0; i < 12; ++i)
                add_ensemble(r, "e" + std::to_string(i), {u(rng), u(rng)}, {i % 3 ? "cam" : "mic"});
            const sim::Position c{u(rng), u(rng)};
            const double radius = std::abs(u(rng));
            CHECK(get_sensors(r, c, radius, "cam") == oracle::in_ball(r, c, radius, "cam"));
            CHECK(get_sensors(r, c, radius, "cam") == get_sensors(r, c, radius, "cam"));
        }
    }
}

TEST_SUITE("re_recruit") {
    TEST_CASE("stationary target") {
        const auto r = cameras();
        const auto prev = get_sensors(r, {0, 0}, 100, "captureImage");
        const auto rec = re_recruit(prev, {0, 0}, 100, r, "captureImage");
        CHECK(rec.joined.empty());
        CHECK(rec.departed.empty());
        CHECK(rec.retained == prev);
    }
    TEST_CASE("one camera leaves and one enters") {
        const auto r = cameras();
        const auto prev = get_sensors(r, {0, 0}, 100, "captureImage");
        REQUIRE(prev == std::vector<std::string>{"cam1", "cam2", "cam3"});
        const sim::Position moved{40, 0};
        const auto rec = re_recruit(prev, moved, 100, r, "captureImage");
        CHECK(rec.joined == std::vector<std::string>{"cam4"});
        CHECK(rec.departed == std::vector<std::string>{"cam1"});
        CHECK(rec.retained == std::vector<std::string>{"cam2", "cam3"});
        // Against the oracle: joined and retained partition the new ball.
        auto now = rec.joined;
        now.insert(now.end(), rec.retained.begin(), rec.retained.end());
        std::sort(now.begin(), now.end());
        CHECK(now == oracle::in_ball(r, moved, 100, "captureImage"));
    }
    TEST_CASE("radius covering everything retains all") {
        const auto r = cameras();
        const auto prev = get_sensors(r, {0, 0}, 1000, "captureImage");
        const auto rec = re_recruit(prev, {50, 0}, 1000, r, "captureImage");
        CHECK(rec.retained.size() == 4);
        CHECK(rec.joined.empty());
        CHECK(rec.departed.empty());
    }
}

TEST_SUITE("place") {
    TEST_CASE("tracking program: captures on cameras, model on the leader") {
        const auto r = cameras();
        const auto g = ir::compile_source(ticktalk::testing::corpus("tracking.tt"));
        const auto p = place(g, r);
        for (const auto& n : g.nodes) {
            INFO(n.id);
            REQUIRE(p.assigned.count(n.id));
            if (n.kind == ir::NodeKind::SetExpand) {
                CHECK(p.candidates.at(n.id) == std::vector<std::string>{"cam1", "cam2", "cam3", "cam4"});
            } else {
                CHECK(p.assigned.at(n.id) == "leader");
            }
        }
    }
    TEST_CASE("missing capability") {
        auto r = base_registry();
        add_ensemble(r, "a", {0, 0}, {"poll"});
        const auto g = ir::compile_source("within(1000ms) { v = poll(); actuate(v); }");
        CHECK_THROWS_AS(place(g, r), NoFeasiblePlacement);
    }
    TEST_CASE("lowest id wins without a leader") {
        auto r = base_registry();
        add_ensemble(r, "b", {0, 0}, {"poll", "actuate"});
        add_ensemble(r, "a", {0, 0}, {"poll", "actuate"});
        const auto g = ir::compile_source("v = poll(); actuate(v);");
        for (const auto& [n, e] : place(g, r).assigned) CHECK(e == "a");
    }
    TEST_CASE("leader preferred only when capable") {
        auto r = base_registry();
        add_ensemble(r, "a", {0, 0}, {"poll"});
        add_ensemble(r, "z", {0, 0}, {"actuate"});
        r.leader = "z";
        const auto g = ir::compile_source("v = poll(); actuate(v);");
        const auto p = place(g, r);
        CHECK(p.assigned.at(g.nodes[0].id) == "a");
        CHECK(p.assigned.at(g.nodes[1].id) == "z");
    }
}

TEST_SUITE("establish_sync_domain") {
    clocks::SyncParams params;

    std::map<std::string, clocks::LocalClock> clocks_of(const Registry& r) {
        std::map<std::string, clocks::LocalClock> out;
        for (const auto& [id, e] : r.ensembles)
            if (r.local_clocks.count(e.clock)) out[id] = r.local_clocks.at(e.clock);
        return out;
    }

    TEST_CASE("four members on symmetric zero-jitter links") {
        const auto r = cameras();
        auto cl = clocks_of(r);
        const std::vector<std::string> members{"cam1", "cam2", "cam3", "cam4"};
        const auto d = establish_sync_domain(members, "ref", kNanosPerMicro, cl, r, params, 1, 0);
        CHECK(d.tokens.size() == 4);
        for (const auto& [m, t] : d.tokens) {
            INFO(m);
            CHECK(t.achieved_ns == 0);
            CHECK(t.expires_at_ns > d.syncs.at(m).completed_at_true_ns);
        }
        CHECK(d.domain.members == members);
        CHECK(d.domain.precision_ns == kNanosPerMicro);
    }
    TEST_CASE("one asymmetric link blocks the whole domain") {
        auto r = cameras();
        sim::NetworkLink bad = r.links.at("L");
        bad.id = "bad";
        bad.asymmetry_ns = 2 * ms;
        r.links["bad"] = bad;
        r.ensembles.at("cam3").link = "bad";
        auto cl = clocks_of(r);
        const auto before = cl;
        try {
            establish_sync_domain({"cam1", "cam2", "cam3", "cam4"}, "ref", kNanosPerMicro, cl, r, params, 1, 0);
            FAIL("expected PrecisionUnachievable");
        } catch (const PrecisionUnachievable& e) {
            CHECK(e.member == "cam3");
            CHECK(e.floor_ns == ms);
        }
        for (const auto& [m, c] : cl) {
            CHECK(c.correction.offset_correction_ns == before.at(m).correction.offset_correction_ns);
            CHECK(c.correction.rate_correction_ppm == before.at(m).correction.rate_correction_ppm);
        }
    }
    TEST_CASE("self sync is immediate and exact") {
        auto r = cameras();
        r.ensembles.at("leader").clock = "ref";
        auto cl = clocks_of(r);
        const auto d = establish_sync_domain({"leader"}, "ref", kNanosPerMicro, cl, r, params, 1, 500);
        CHECK(d.tokens.at("leader").achieved_ns == 0);
        CHECK(d.syncs.at("leader").self_sync);
        CHECK(d.syncs.at("leader").completed_at_true_ns == 500);
    }
    TEST_CASE("tokens stop being honored at expiry") {
        const auto r = cameras();
        auto cl = clocks_of(r);
        const auto d = establish_sync_domain({"cam4"}, "ref", kNanosPerMicro, cl, r, params, 1, 0);
        const auto tok = d.tokens.at("cam4");
        ir::GraphNode n;
        n.id = "x";
        n.firing_rule.sync.push_back({"ref", kNanosPerMicro});
        ir::TokenState s;
        s.put_sync("ref", tok);
        CHECK(ir::firing_ready(n, s, tok.expires_at_ns));
        CHECK_FALSE(ir::firing_ready(n, s, tok.expires_at_ns + 1));
    }
}

TEST_SUITE("token_validity") {
    TEST_CASE("budget over residual rate") {
        CHECK(token_validity(10, ms, 0) == 100 * kNanosPerSecond);
        CHECK(token_validity(10, ms, ms / 2) == 50 * kNanosPerSecond);
        CHECK(token_validity(0, ms, 0) == std::numeric_limits<Nanos>::max());
    }
}

TEST_SUITE("harmonize") {
    Registry one_ensemble() {
        auto r = base_registry();
        r.reference_clocks["ref2"] = clocks::ReferenceClock{"ref2", 5, 100, 0, 0};
        r.reference_clocks["ref3"] = clocks::ReferenceClock{"ref3", 0, 0, 0, 0};
        r.add_syntonizable("ref", "ref2");
        add_ensemble(r, "e", {0, 0}, {"work"});
        return r;
    }

    TEST_CASE("20 ms and 30 ms periods with 5 ms windows") {
        const auto r = one_ensemble();
        Tenancy t;
        auto first = harmonize(t, periodic("a", 20 * ms, 5 * ms), "e", r);
        REQUIRE(std::holds_alternative<Accept>(first));
        CHECK(std::get<Accept>(first).window->phase_ns == 0);
        admit(t, periodic("a", 20 * ms, 5 * ms), "e", std::get<Accept>(first));
        auto second = harmonize(t, periodic("b", 30 * ms, 5 * ms), "e", r);
        REQUIRE(std::holds_alternative<Accept>(second));
        const auto w = *std::get<Accept>(second).window;
        CHECK(w.phase_ns == oracle::first_phase({{0, 5 * ms, 20 * ms}}, {0, 5 * ms, 30 * ms}, 100).value());
        CHECK(w.phase_ns == 5 * ms);
        CHECK_FALSE(oracle::replay_overlaps({{0, 5 * ms, 20 * ms}}, w));
        // A 10 ms phase collides at t = 40 ms.
        CHECK(oracle::replay_overlaps({{0, 5 * ms, 20 * ms}}, {10 * ms, 5 * ms, 30 * ms}));
    }
    TEST_CASE("demand above the period is infeasible") {
        const auto r = one_ensemble();
        Tenancy t;
        admit(t, periodic("a", 20 * ms, 15 * ms), "e", Accept{Window{0, 15 * ms, 20 * ms}, "ref"});
        auto res = harmonize(t, periodic("b", 20 * ms, 10 * ms), "e", r);
        REQUIRE(std::holds_alternative<ConflictReport>(res));
        const auto& c = std::get<ConflictReport>(res);
        CHECK(c.kind == ConflictReport::Kind::WindowInfeasible);
        CHECK_FALSE(c.explanation.empty());
        CHECK_FALSE(oracle::first_phase({{0, 15 * ms, 20 * ms}}, {0, 10 * ms, 20 * ms}, 100));
    }
    TEST_CASE("empty tenancy accepts at phase 0") {
        const auto r = one_ensemble();
        auto res = harmonize(Tenancy{}, periodic("a", 30 * ms, 7 * ms), "e", r);
        REQUIRE(std::holds_alternative<Accept>(res));
        CHECK(std::get<Accept>(res).window->phase_ns == 0);
    }
    TEST_CASE("clock compatibility") {
        const auto r = one_ensemble();
        Tenancy t;
        auto a = periodic("a", 20 * ms, 1 * ms, "ref");
        a.window.reset();
        admit(t, a, "e", Accept{std::nullopt, "ref"});
        auto same = periodic("b", 20 * ms, 1 * ms, "ref");
        auto synt = periodic("b", 20 * ms, 1 * ms, "ref2");
        auto other = periodic("b", 20 * ms, 1 * ms, "ref3");
        CHECK(std::holds_alternative<Accept>(harmonize(t, same, "e", r)));
        CHECK(std::holds_alternative<Accept>(harmonize(t, synt, "e", r)));
        auto res = harmonize(t, other, "e", r);
        REQUIRE(std::holds_alternative<ConflictReport>(res));
        CHECK(std::get<ConflictReport>(res).kind == ConflictReport::Kind::ClockIncompatible);
        // Blocks without timing constraints never clash on clocks.
        other.timing_bearing = false;
        other.window.reset();
        CHECK(std::holds_alternative<Accept>(harmonize(t, other, "e", r)));
        // The same tenant is not checked against itself.
        auto own = periodic("a", 20 * ms, 1 * ms, "ref3");
        CHECK(std::holds_alternative<Accept>(harmonize(t, own, "e", r)));
    }
    TEST_CASE("capability missing") {
        const auto r = one_ensemble();
        auto b = periodic("a", 20 * ms, 1 * ms);
        b.op = "fly";
        auto res = harmonize(Tenancy{}, b, "e", r);
        REQUIRE(std::holds_alternative<ConflictReport>(res));
        CHECK(std::get<ConflictReport>(res).kind == ConflictReport::Kind::CapabilityMissing);
    }
    TEST_CASE("windows_overlap agrees with interval replay") {
        std::mt19937_64 rng(11);
        const Nanos periods[] = {4, 6, 8, 9, 12};
        for (int i = 0; i < 2000; ++i) {
            const Nanos pa = periods[rng() % 5], pb = periods[rng() % 5];
            const Window a{static_cast<Nanos>(rng() % pa), static_cast<Nanos>(1 + rng() % pa), pa};
            const Window b{static_cast<Nanos>(rng() % pb), static_cast<Nanos>(1 + rng() % pb), pb};
            INFO(a.phase_ns, " ", a.width_ns, " ", a.period_ns, " / ", b.phase_ns, " ", b.width_ns, " ", b.period_ns);
            CHECK(windows_overlap(a, b) == oracle::replay_overlaps({a}, b));
            CHECK(windows_overlap(a, b) == windows_overlap(b, a));
        }
    }
    TEST_CASE("three tenants: accepted windows never overlap") {
        const auto r = one_ensemble();
        std::mt19937_64 rng(5);
        const Nanos periods[] = {10 * ms, 20 * ms, 30 * ms, 40 * ms, 60 * ms};
        for (int trial = 0; trial < 40; ++trial) {
            Tenancy t;
            std::vector<Window> accepted;
            for (int k = 0; k < 3; ++k) {
                const Nanos p = periods[rng() % 5];
                const Nanos w = static_cast<Nanos>(1 + rng() % 6) * ms;
                const auto req = periodic("t" + std::to_string(k), p, w);
                const auto res = harmonize(t, req, "e", r);
                const auto expect = oracle::first_phase(accepted, {0, w, p}, 100);
                REQUIRE(std::holds_alternative<Accept>(res) == expect.has_value());
                if (!expect) continue;
                const auto win = *std::get<Accept>(res).window;
                CHECK(win.phase_ns == *expect);
                CHECK_FALSE(oracle::replay_overlaps(accepted, win));
                accepted.push_back(win);
                admit(t, req, "e", std::get<Accept>(res));
            }
        }
    }
}

TEST_SUITE("feedback_update") {
    sim::NetworkLink ten_ms() {
        sim::NetworkLink l;
        l.id = "L";
        l.latency_min_ns = 5 * ms;
        l.latency_mode_ns = 10 * ms;
        return l;
    }
    TEST_CASE("fixed point") {
        FeedbackState s;
        s.track(ten_ms());
        feedback_update(s, {{"L", {10 * ms}}});
        CHECK(s.links.at("L").mode_ns == doctest::Approx(10.0 * ms));
        CHECK(s.links.at("L").guard_ns == ms);
    }
    TEST_CASE("ewma step") {
        FeedbackState s;
        s.track(ten_ms());
        feedback_update(s, {{"L", {20 * ms}}});
        CHECK(s.links.at("L").mode_ns == doctest::Approx(12.0 * ms));
        CHECK(s.links.at("L").jitter_ns == doctest::Approx(2.0 * ms));
        CHECK(s.links.at("L").guard_ns == 7 * ms);
    }
    TEST_CASE("no samples leave the estimate alone") {
        FeedbackState s;
        s.track(ten_ms());
        const auto before = s.links.at("L").mode_ns;
        feedback_update(s, {});
        feedback_update(s, {{"L", {}}});
        feedback_update(s, {{"other", {1}}});
        CHECK(s.links.at("L").mode_ns == before);
    }
    TEST_CASE("a burst of larger samples never drops below (1 - alpha) of the prior") {
        std::mt19937_64 rng(3);
        for (int i = 0; i < 200; ++i) {
            FeedbackState s;
            s.track(ten_ms());
            feedback_update(s, {{"L", {static_cast<Nanos>(rng() % (30 * ms))}}});
            const double prior = s.links.at("L").mode_ns;
            std::vector<Nanos> burst;
            for (int k = 0; k < 5; ++k) burst.push_back(static_cast<Nanos>(prior) + static_cast<Nanos>(rng() % ms));
            feedback_update(s, {{"L", burst}});
            CHECK(s.links.at("L").mode_ns >= (1 - s.alpha) * prior);
        }
    }
}
