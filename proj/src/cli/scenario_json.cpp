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


#include "ticktalk/cli/scenario_json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ticktalk::cli {

namespace {

using nlohmann::json;
using sim::ScenarioError;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ScenarioError(where + ": " + what);
}

/// Object view that remembers which keys were consumed.
class Obj {
public:
    Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) fail(where_, "expected an object");
    }
    ~Obj() = default;

    bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k);
    }
    const json& req(const std::string& k) {
        if (!has(k)) fail(where_, "missing key '" + k + "'");
        return j_.at(k);
    }
    std::string at(const std::string& k) const { return where_ + "/" + k; }

    std::string str(const std::string& k) {
        const auto& v = req(k);
        if (!v.is_string()) fail(at(k), "expected a string");
        return v.get<std::string>();
    }
    std::string str_or(const std::string& k, std::string d) { return has(k) ? str(k) : d; }
    double num(const std::string& k) {
        const auto& v = req(k);
        if (!v.is_number()) fail(at(k), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(at(k), "expected a finite number");
        return d;
    }
    double num_or(const std::string& k, double d) { return has(k) ? num(k) : d; }
    std::int64_t integer(const std::string& k) {
        const auto& v = req(k);
        if (!v.is_number_integer()) fail(at(k), "expected an integer");
        return v.get<std::int64_t>();
    }
    std::int64_t int_or(const std::string& k, std::int64_t d) { return has(k) ? integer(k) : d; }
    bool boolean_or(const std::string& k, bool d) {
        if (!has(k)) return d;
        const auto& v = j_.at(k);
        if (!v.is_boolean()) fail(at(k), "expected true or false");
        return v.get<bool>();
    }

    /// Call once every key has been read.
    void done() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) fail(where_, "unknown key '" + k + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

Nanos duration_value(const json& v, const std::string& where, bool allow_negative) {
    if (v.is_number_integer()) {
        const auto ns = v.get<std::int64_t>();
        if (ns < 0 && !allow_negative) fail(where, "duration must not be negative");
        return ns;
    }
    if (!v.is_string()) fail(where, "expected a duration such as \"1ms\"");
    std::string text = v.get<std::string>();
    bool negative = false;
    if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
        if (!allow_negative) fail(where, "duration must not be signed");
        negative = text[0] == '-';
        text.erase(0, 1);
    }
    std::optional<Duration> d;
    try {
        d = parse_duration(text);
    } catch (const Error& e) {
        fail(where, e.what());
    }
    if (!d) fail(where, "malformed duration \"" + v.get<std::string>() + "\"");
    return negative ? -d->ns() : d->ns();
}

Nanos dur(Obj& o, const std::string& k, bool allow_negative = false) {
    return duration_value(o.req(k), o.at(k), allow_negative);
}
Nanos dur_or(Obj& o, const std::string& k, Nanos d, bool allow_negative = false) {
    return o.has(k) ? dur(o, k, allow_negative) : d;
}

/// Standard deviations may be fractional: a number is nanoseconds.
double stddev_or(Obj& o, const std::string& k) {
    if (!o.has(k)) return 0;
    const auto& v = o.req(k);
    if (v.is_number() && !v.is_number_integer()) {
        const double d = v.get<double>();
        if (!(d >= 0) || !std::isfinite(d)) fail(o.at(k), "expected a non-negative value");
        return d;
    }
    return static_cast<double>(dur(o, k));
}

const json& array(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array");
    return v;
}

sim::Position position(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        fail(where, "expected [x, y] in metres");
    return {v[0].get<double>(), v[1].get<double>()};
}

sim::ExecBounds bounds(const json& v, const std::string& where) {
    Obj o(v, where);
    sim::ExecBounds b{dur(o, "best"), dur(o, "worst")};
    o.done();
    if (b.worst_ns < b.best_ns) fail(where, "worst must be at least best");
    return b;
}

template <class Map, class Fn>
void load_list(Obj& root, const std::string& key, Map& out, Fn fn) {
    if (!root.has(key)) return;
    const auto& list = array(root.req(key), "/" + key);
    for (std::size_t i = 0; i < list.size(); ++i) {
        Obj o(list[i], "/" + key + "/" + std::to_string(i));
        auto item = fn(o);
        o.done();
        if (!out.emplace(item.id, item).second) fail(o.at("id"), "duplicate id '" + item.id + "'");
    }
}

sim::Truthiness truthiness(const std::string& s, const std::string& where) {
    if (s == "always") return sim::Truthiness::Always;
    if (s == "never") return sim::Truthiness::Never;
    if (s == "target_stationary") return sim::Truthiness::TargetStationary;
    fail(where, "expected always, never or target_stationary");
}

}  // namespace

sim::Scenario parse_scenario(const json& doc) {
    sim::Scenario sc;
    Obj root(doc, "");
    const auto& version = root.req("version");
    if (!version.is_number_integer() || version.get<std::int64_t>() != 1) fail("/version", "only version 1 is supported");
    sc.version = 1;
    sc.epoch_label = root.str_or("epoch_label", "");
    if (root.has("wall_time_at_start")) {
        const auto text = root.str("wall_time_at_start");
        auto w = parse_wall_time(text);
        if (!w) fail("/wall_time_at_start", "expected a wall time such as \"@4:00PM\"");
        sc.wall_time_at_start = *w;
    }
    sc.self_clock = root.str("self_clock");
    sc.sync_enabled = root.boolean_or("sync_enabled", true);

    if (root.has("defaults")) {
        Obj d(root.req("defaults"), "/defaults");
        auto& D = sc.defaults;
        D.guard_band_ns = dur_or(d, "guard_band", D.guard_band_ns);
        D.max_rounds = static_cast<int>(d.int_or("max_rounds", D.max_rounds));
        D.alpha = d.num_or("alpha", D.alpha);
        D.grid_divisions = static_cast<int>(d.int_or("grid_divisions", D.grid_divisions));
        D.high_precision_factor = d.num_or("high_precision_factor", D.high_precision_factor);
        D.sync_z = d.num_or("sync_z", D.sync_z);
        D.unsynced_uncertainty_ns = dur_or(d, "unsynced_uncertainty", D.unsynced_uncertainty_ns);
        D.high_precision_threshold_ns = dur_or(d, "high_precision_threshold", D.high_precision_threshold_ns);
        D.max_events = d.int_or("max_events", D.max_events);
        d.done();
    }

    auto& reg = sc.registry;
    load_list(root, "reference_clocks", reg.reference_clocks, [](Obj& o) {
        clocks::ReferenceClock c;
        c.id = o.str("id");
        c.freq_error_ppm = o.num_or("freq_error_ppm", 0);
        c.phase_offset_ns = dur_or(o, "phase_offset", 0, true);
        c.epoch_ns = dur_or(o, "epoch", 0, true);
        c.jitter_std_ns = stddev_or(o, "jitter_std");
        return c;
    });
    load_list(root, "local_clocks", reg.local_clocks, [](Obj& o) {
        clocks::LocalClock c;
        c.id = o.str("id");
        c.drift_ppm = o.num_or("drift_ppm", 0);
        c.init_offset_ns = dur_or(o, "init_offset", 0, true);
        c.epoch_ns = dur_or(o, "epoch", 0, true);
        c.jitter_std_ns = stddev_or(o, "jitter_std");
        return c;
    });
    load_list(root, "links", reg.links, [](Obj& o) {
        sim::NetworkLink l;
        l.id = o.str("id");
        l.latency_mode_ns = dur(o, "latency_mode");
        l.latency_min_ns = dur_or(o, "latency_min", 0);
        l.latency_jitter_std_ns = stddev_or(o, "latency_jitter_std");
        l.asymmetry_ns = dur_or(o, "asymmetry", 0);
        l.up = o.boolean_or("up", true);
        return l;
    });
    load_list(root, "power_models", reg.power_models, [](Obj& o) {
        clocks::PowerModel p;
        p.id = o.str("id");
        p.p_sleep_nw = o.integer("p_sleep_nw");
        p.p_idle_nw = o.integer("p_idle_nw");
        p.p_highclock_extra_nw = o.int_or("p_highclock_extra_nw", 0);
        p.e_exchange_nj = o.int_or("e_exchange_nj", 0);
        p.e_radio_wake_nj = o.int_or("e_radio_wake_nj", 0);
        return p;
    });
    load_list(root, "ensembles", reg.ensembles, [](Obj& o) {
        sim::Ensemble e;
        e.id = o.str("id");
        e.position = position(o.req("position"), o.at("position"));
        const auto& caps = array(o.req("capabilities"), o.at("capabilities"));
        for (const auto& c : caps) {
            if (!c.is_string()) fail(o.at("capabilities"), "expected strings");
            e.capabilities.insert(c.get<std::string>());
        }
        e.clock = o.str("clock");
        e.power = o.str("power");
        e.link = o.str("link");
        e.admin_domain = o.str_or("admin_domain", "");
        e.mostly_off = o.boolean_or("mostly_off", false);
        if (o.has("exec_time")) {
            const auto& m = o.req("exec_time");
            if (!m.is_object()) fail(o.at("exec_time"), "expected an object keyed by op");
            for (const auto& [op, b] : m.items()) e.exec_time[op] = bounds(b, o.at("exec_time") + "/" + op);
        }
        return e;
    });
    if (root.has("syntonizable")) {
        const auto& list = array(root.req("syntonizable"), "/syntonizable");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& p = list[i];
            if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
                fail("/syntonizable/" + std::to_string(i), "expected a pair of reference clock ids");
            reg.add_syntonizable(p[0].get<std::string>(), p[1].get<std::string>());
        }
    }
    if (root.has("leader")) reg.leader = root.str("leader");

    if (root.has("trajectory")) {
        const auto& list = array(root.req("trajectory"), "/trajectory");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Obj o(list[i], "/trajectory/" + std::to_string(i));
            sim::Waypoint w;
            w.t_ns = dur(o, "t");
            w.position = position(o.req("position"), o.at("position"));
            o.done();
            sc.trajectory.push_back(w);
        }
    }
    if (root.has("ops")) {
        const auto& list = array(root.req("ops"), "/ops");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = "/ops/" + std::to_string(i);
            Obj o(list[i], where);
            sim::OpSpec op;
            op.name = o.str("name");
            if (o.has("exec_time")) op.exec = bounds(o.req("exec_time"), o.at("exec_time"));
            if (o.has("truthy")) op.truthy = truthiness(o.str("truthy"), o.at("truthy"));
            else if (op.name == "predictNextPosition") op.truthy = sim::Truthiness::TargetStationary;
            o.done();
            if (!sc.ops.emplace(op.name, op).second) fail(where, "duplicate op '" + op.name + "'");
        }
    }
    root.done();

    try {
        reg.check();
        sc.check();
    } catch (const ScenarioError&) {
        throw;
    } catch (const Error& e) {
        throw ScenarioError(e.what());
    }
    if (!reg.reference_clocks.count(sc.self_clock))
        fail("/self_clock", "'" + sc.self_clock + "' is not a reference clock");
    return sc;
}

sim::Scenario load_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }
    return parse_scenario(doc);
}

sim::Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot read scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario_text(ss.str());
}

}  // namespace ticktalk::cli
