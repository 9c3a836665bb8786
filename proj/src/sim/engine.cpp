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
#include <limits>
#include <memory>
#include <tuple>

#include "ticktalk/ir/lower.hpp"
#include "ticktalk/sim/engine.hpp"

namespace ticktalk::sim {

namespace {

constexpr Nanos kForever = std::numeric_limits<Nanos>::max();

struct Value {
    enum class Kind { Plain, Set, Skip };
    Kind kind = Kind::Plain;
    bool truthy = true;
    std::vector<std::string> members;
    std::set<std::string> lineage;  // "source#k" tags of enclosing latency paths
};

enum class RegionKind { Top, Loop, Every };

RegionKind region_kind(const std::string& region) {
    if (region.empty()) return RegionKind::Top;
    if (region.rfind("loop", 0) == 0) return RegionKind::Loop;
    if (region.rfind("every", 0) == 0) return RegionKind::Every;
    throw UnsupportedProgram("unknown execution region '" + region + "'");
}

/// How one input port receives its token in each epoch.
struct PortFeed {
    const ir::DataEdge* forward = nullptr;
    bool forward_same_region = false;
    const ir::DataEdge* loop_back = nullptr;
    const ir::Port* port = nullptr;
};

struct LatencyPath {
    std::string scope;
    std::string source;  // node ids, unprefixed
    std::string sink;
    Nanos bound_ns = 0;
};

struct NodeRt {
    const ir::GraphNode* node = nullptr;
    std::string qid;
    std::string region;
    RegionKind kind = RegionKind::Top;
    std::string ensemble;
    std::vector<PortFeed> feeds;
    std::vector<const ir::DataEdge*> out;
    bool every_root = false;
    Nanos period_ns = 0;
    Nanos phase_ns = 0;
    std::optional<Nanos> at_clock_ns;
    std::set<std::string> latency_scopes;
    bool latency_source = false;
    std::int64_t firings = 0;
    // Sync requirement, resolved.
    std::string sync_clock;  // as written in the firing rule
    std::string reference;   // reference clock id
    Nanos precision_ns = 0;
    // Set handling.
    std::string group;
    std::vector<std::string> candidates;
    std::vector<std::string> previous_members;
    double radius_m = 0;
    std::string recruit_capability;
};

struct Gather {
    std::size_t expected = 0;
    std::size_t received = 0;
    std::vector<std::string> members;
    std::set<std::string> lineage;
};

struct Inst {
    ir::TokenState tokens;
    std::map<std::string, Value> values;
    std::map<std::string, Gather> gathers;
    bool ticked = false;
    bool started = false;
    bool done = false;
};

using EpochKey = std::tuple<std::size_t, std::string, std::int64_t>;

struct Epoch {
    std::size_t tenant = 0;
    std::string region;
    std::int64_t index = 0;
    std::map<std::string, Inst> insts;
    std::size_t remaining = 0;
    bool started = false;
    bool break_requested = false;
    std::string break_node;
};

using VKey = std::pair<std::string, std::string>;  // ensemble, reference

struct TenantRt {
    std::string name;
    ir::DataflowGraph graph;
    std::string self_clock;
    rtm::Placement placement;
    std::map<std::string, NodeRt> nodes;
    std::map<std::string, std::vector<std::string>> region_nodes;  // topological order
    std::map<std::pair<std::string, std::string>, Value> sticky;    // (consumer, port)
    std::vector<LatencyPath> latency_paths;
    std::map<std::string, std::string> source_scope;  // source qid -> scope
    rtm::FeedbackState feedback;
    std::map<VKey, clocks::LocalClock> vclocks;
    std::map<VKey, ir::SyncToken> tokens;
};

struct MemberRun {
    std::string ensemble;
    std::string inst_qid;
    bool needs_sync = false;
    bool awake = false;
    Nanos awake_from = 0;
    bool high = false;
    int expirations = 0;
    bool fired = false;
    bool failed = false;
    Nanos action_true_ns = 0;
};

struct GroupRun {
    std::size_t tenant = 0;
    EpochKey epoch;
    std::string node;
    Nanos target_clock_ns = 0;
    std::map<std::string, MemberRun> members;
    std::size_t remaining = 0;
    std::set<std::string> lineage;
};

struct Interval {
    Nanos from = 0;
    Nanos to = 0;
    bool high = false;
};

class Engine {
public:
    Engine(const Scenario& sc, std::uint64_t seed, Nanos until) : sc_(sc), reg_(sc.registry), seed_(seed), until_(until) {
        metrics_.seed = seed;
        params_.max_rounds = sc.defaults.max_rounds;
        params_.z = sc.defaults.sync_z;
        for (const auto& [id, e] : reg_.ensembles) phys_[id] = physical_clock(id);
    }

    RunResult execute(const std::vector<Tenant>& tenants);

private:
    // setup
    clocks::LocalClock physical_clock(const std::string& ensemble) const;
    void prepare(const Tenant& t);
    bool admit_tenant(TenantRt& t);
    std::string resolve_clock(const TenantRt& t, const std::string& name) const;

    // clocks and noise
    Stream& stream(const std::string& key) {
        auto it = streams_.find(key);
        if (it == streams_.end()) it = streams_.emplace(key, Stream(seed_, key)).first;
        return it->second;
    }
    Nanos clock_reading(const std::string& ensemble) const {
        return static_cast<Nanos>(std::llroundl(clocks::ideal_read(phys_.at(ensemble), now_)));
    }
    clocks::LocalClock& vclock(TenantRt& t, const std::string& ensemble, const std::string& reference);
    Nanos exec_sample(TenantRt& t, const std::string& stream_key, const std::string& ensemble, const std::string& op);
    /// Time for `runs` exchange sequences; planning reserves room for one retry.
    Nanos sync_overhead(TenantRt& t, const std::string& ensemble, const std::string& reference, Nanos precision,
                        int runs = 2);
    Nanos link_latency_estimate(TenantRt& t, const std::string& ensemble);
    Nanos guard(TenantRt& t, const std::string& ensemble);

    // trace
    void record(const std::string& ensemble, const std::string& node, const std::string& action, Json detail) {
        trace_.append({now_, reg_.ensembles.count(ensemble) ? clock_reading(ensemble) : 0, ensemble, node, action,
                       std::move(detail)});
    }
    void schedule(Nanos t, EventKind kind, std::function<void()> fn) { queue_.push(std::max(t, now_), kind, std::move(fn)); }

    // dataflow
    Epoch& epoch_at(std::size_t tenant, const std::string& region, std::int64_t index);
    void start_epoch(const EpochKey& key);
    void finish_node(const EpochKey& key, const std::string& node);
    void complete_epoch(const EpochKey& key);
    void try_fire(const EpochKey& key, const std::string& node);
    void skip_node(const EpochKey& key, const std::string& node, const std::string& why);
    void fire_node(const EpochKey& key, const std::string& node, Json sync_detail);
    void sync_then_fire(const EpochKey& key, const std::string& node);
    void deliver_outputs(const EpochKey& key, const std::string& node, const Value& value, const std::string& from);
    void put(std::size_t tenant, const EpochKey& key, const std::string& consumer, const std::string& port, Value v);
    void put_sticky(std::size_t tenant, const std::string& consumer, const std::string& port, Value v);
    void tick(std::size_t tenant, const std::string& node, std::int64_t k);
    std::set<std::string> lineage_for(const TenantRt& t, const NodeRt& n, const Inst& inst, std::int64_t firing) const;

    // simultaneity groups
    void dispatch_group(const EpochKey& key, const std::string& node);
    void member_on_command(int gid, const std::string& m);
    void member_on_wake(int gid, const std::string& m);
    void member_sync(int gid, const std::string& m);
    void member_after_sync(int gid, const std::string& m);
    void member_fire(int gid, const std::string& m);
    void member_fail(int gid, const std::string& m, const std::string& why);
    void member_sleep(GroupRun& g, MemberRun& mr);
    void member_done(int gid, const std::string& m);
    void gather_arrive(const EpochKey& consumer_epoch, const std::string& consumer, const std::string& port,
                       const std::string* member, const std::set<std::string>& lineage);
    bool token_valid(TenantRt& t, const std::string& ensemble, const std::string& reference, Nanos precision,
                     Nanos until) const;
    void note_sync(const std::string& ensemble, const rtm::MemberSync& ms);
    void add_conflict(rtm::ConflictReport c);

    // energy and analysis
    void awake_interval(const std::string& ensemble, Nanos from, Nanos to, bool high) {
        if (reg_.ensembles.at(ensemble).mostly_off || high) awake_[ensemble].push_back({from, to, high});
    }
    void finalize(RunResult& out);

    const Scenario& sc_;
    const rtm::Registry& reg_;
    std::uint64_t seed_;
    Nanos until_;
    Nanos now_ = 0;
    clocks::SyncParams params_;
    EventQueue queue_;
    EventTrace trace_;
    Metrics metrics_;
    std::map<std::string, clocks::LocalClock> phys_;
    std::map<std::string, Stream> streams_;
    std::vector<TenantRt> tenants_;
    rtm::Tenancy tenancy_;
    std::map<EpochKey, Epoch> epochs_;
    std::map<int, GroupRun> groups_;
    int next_group_ = 0;
    std::map<std::string, std::vector<Interval>> awake_;
    std::map<std::string, std::vector<int>> sync_rounds_;
    std::set<std::string> conflict_keys_;
};

clocks::LocalClock Engine::physical_clock(const std::string& ensemble) const {
    const auto& e = reg_.ensembles.at(ensemble);
    if (auto it = reg_.local_clocks.find(e.clock); it != reg_.local_clocks.end()) {
        auto c = it->second;
        c.owner = ensemble;
        c.high_precision_factor = sc_.defaults.high_precision_factor;
        return c;
    }
    // The ensemble hosts a reference clock; model it as a local clock with
    // the same affine map.
    const auto& r = reg_.reference_clocks.at(e.clock);
    clocks::LocalClock c;
    c.id = r.id;
    c.owner = ensemble;
    c.drift_ppm = r.freq_error_ppm;
    c.init_offset_ns = r.phase_offset_ns;
    c.epoch_ns = r.epoch_ns;
    c.jitter_std_ns = r.jitter_std_ns;
    c.high_precision_factor = sc_.defaults.high_precision_factor;
    return c;
}

std::string Engine::resolve_clock(const TenantRt& t, const std::string& name) const {
    const std::string id = name == "self" ? t.self_clock : name;
    if (!reg_.reference_clocks.count(id)) throw ScenarioError("program refers to unknown reference clock '" + id + "'");
    return id;
}

clocks::LocalClock& Engine::vclock(TenantRt& t, const std::string& ensemble, const std::string& reference) {
    auto it = t.vclocks.find({ensemble, reference});
    if (it == t.vclocks.end()) it = t.vclocks.emplace(VKey{ensemble, reference}, phys_.at(ensemble)).first;
    return it->second;
}

Nanos Engine::exec_sample(TenantRt& t, const std::string& key, const std::string& ensemble, const std::string& op) {
    const auto b = sc_.exec_bounds(ensemble, op);
    return stream(t.name + "/exec/" + key).uniform_int(b.best_ns, b.worst_ns);
}

Nanos Engine::link_latency_estimate(TenantRt& t, const std::string& ensemble) {
    const auto& link = reg_.links.at(reg_.ensembles.at(ensemble).link);
    t.feedback.track(link);
    const auto& e = t.feedback.links.at(link.id);
    return static_cast<Nanos>(std::ceil(e.mode_ns + 3 * e.jitter_ns));
}

Nanos Engine::guard(TenantRt& t, const std::string& ensemble) {
    const auto& link = reg_.links.at(reg_.ensembles.at(ensemble).link);
    t.feedback.track(link);
    return t.feedback.links.at(link.id).guard_ns;
}

Nanos Engine::sync_overhead(TenantRt& t, const std::string& ensemble, const std::string& reference, Nanos precision,
                            int runs) {
    if (reg_.hosts_reference(ensemble, reference)) return 0;
    const auto& link = reg_.links.at(reg_.ensembles.at(ensemble).link);
    const auto& ref = reg_.reference_clocks.at(reference);
    int rounds = 0;
    try {
        rounds = clocks::rounds_needed(precision, link.asymmetry_ns,
                                       clocks::round_error_std(link, vclock(t, ensemble, reference), ref), params_);
    } catch (const clocks::UnachievablePrecision&) {
        return 0;  // the sync itself will report it
    }
    return runs * rounds * (2 * link_latency_estimate(t, ensemble) + link.asymmetry_ns);
}

// ---------------------------------------------------------------------------
// Setup

void Engine::prepare(const Tenant& tenant) {
    TenantRt t;
    t.name = tenant.name;
    t.graph = tenant.graph;
    t.self_clock = tenant.self_clock.value_or(sc_.self_clock);
    if (!reg_.reference_clocks.count(t.self_clock))
        throw ScenarioError("tenant " + t.name + ": self clock " + t.self_clock + " is not a reference clock");
    t.feedback.alpha = sc_.defaults.alpha;
    t.feedback.base_guard_ns = sc_.defaults.guard_band_ns;
    t.graph.check();
    if (tenant.placement) {
        t.placement = *tenant.placement;
        for (const auto& n : t.graph.nodes) {
            auto it = t.placement.assigned.find(n.id);
            if (it == t.placement.assigned.end())
                throw PlacementCapabilityError("placement leaves " + n.id + " unassigned");
            auto e = reg_.ensembles.find(it->second);
            if (e == reg_.ensembles.end()) throw PlacementCapabilityError(n.id + " placed on unknown " + it->second);
            if (n.kind == ir::NodeKind::Call && !e->second.capabilities.count(n.op()))
                throw PlacementCapabilityError(n.id + " placed on " + it->second + ", which cannot run " + n.op());
        }
    } else {
        t.placement = rtm::place(t.graph, reg_);
    }

    for (const auto& id : t.graph.topological_order()) {
        const auto& n = *t.graph.find(id);
        if (n.region.find('/') != std::string::npos)
            throw UnsupportedProgram("nested timing regions are not simulated (" + n.id + " in " + n.region + ")");
        NodeRt rt;
        rt.node = &n;
        rt.qid = t.name + "/" + n.id;
        rt.region = n.region;
        rt.kind = region_kind(n.region);
        rt.ensemble = t.placement.assigned.at(n.id);
        if (auto c = t.placement.candidates.find(n.id); c != t.placement.candidates.end()) rt.candidates = c->second;
        t.region_nodes[n.region].push_back(n.id);
        t.nodes.emplace(id, std::move(rt));
    }
    for (const auto& e : t.graph.data_edges) t.nodes.at(e.producer).out.push_back(&e);
    for (auto& [id, rt] : t.nodes) {
        const auto& n = *rt.node;
        for (const auto& p : n.firing_rule.ports) {
            PortFeed f;
            f.port = &p;
            for (const auto& e : t.graph.data_edges) {
                if (e.consumer != id || e.port != p.name) continue;
                if (e.loop_back) {
                    f.loop_back = &e;
                } else {
                    f.forward = &e;
                    f.forward_same_region = t.nodes.at(e.producer).region == rt.region;
                }
            }
            rt.feeds.push_back(f);
        }
        for (const auto& c : n.code_block.constraints) {
            if (const auto* fr = std::get_if<ir::Frequency>(&c)) rt.period_ns = fr->period_ns;
            if (const auto* at = std::get_if<ir::AtTime>(&c))
                rt.at_clock_ns = at->instant.ns - sc_.wall_time_at_start.ns;
            if (const auto* l = std::get_if<ir::Latency>(&c)) rt.latency_scopes.insert(l->scope);
            if (const auto* s = std::get_if<ir::Simultaneous>(&c)) rt.group = t.name + "/" + s->group_id;
        }
        if (rt.kind == RegionKind::Every) {
            if (rt.period_ns <= 0) throw UnsupportedProgram(n.id + " is periodic but has no period");
            const Nanos worst = sc_.exec_bounds(rt.ensemble, n.op()).worst_ns;
            if (worst > rt.period_ns) throw OverrunError(rt.qid, rt.period_ns, worst);
            rt.every_root = std::none_of(rt.feeds.begin(), rt.feeds.end(),
                                         [](const PortFeed& f) { return f.forward && f.forward_same_region; });
        }
        if (!n.firing_rule.sync.empty()) {
            rt.sync_clock = n.firing_rule.sync.front().clock;
            rt.reference = resolve_clock(t, rt.sync_clock);
            rt.precision_ns = n.firing_rule.sync.front().precision_ns;
            for (const auto& s : n.firing_rule.sync)
                if (s.clock != rt.sync_clock)
                    throw UnsupportedProgram(n.id + " needs sync to more than one clock");
        }
        if (n.op() == "getSensors" && n.kind == ir::NodeKind::Call) {
            if (n.code_block.params.empty()) throw UnsupportedProgram(n.id + ": getSensors needs a literal radius");
            rt.radius_m = std::stod(n.code_block.params.back());
            for (const auto* e : rt.out) {
                const auto* c = t.graph.find(e->consumer);
                if (c && c->kind == ir::NodeKind::SetExpand) rt.recruit_capability = c->op();
            }
        }
    }
    // Latency paths: first and last node of each within block in topological order.
    std::map<std::string, LatencyPath> paths;
    for (const auto& id : t.graph.topological_order()) {
        const auto& n = *t.graph.find(id);
        for (const auto& c : n.code_block.constraints) {
            if (const auto* l = std::get_if<ir::Latency>(&c)) {
                auto [it, fresh] = paths.try_emplace(l->scope, LatencyPath{l->scope, id, id, l->bound_ns});
                if (!fresh) it->second.sink = id;
            }
        }
    }
    for (const auto& [scope, p] : paths) {
        t.latency_paths.push_back(p);
        t.nodes.at(p.source).latency_source = true;
        t.source_scope[t.name + "/" + p.source] = scope;
    }
    tenants_.push_back(std::move(t));
}

bool Engine::admit_tenant(TenantRt& t) {
    auto staged = tenancy_;
    std::map<std::pair<std::string, std::string>, Nanos> phases;
    for (const auto& [id, rt] : t.nodes) {
        const auto& n = *rt.node;
        rtm::BlockRequest b;
        b.tenant = t.name;
        b.block_id = rt.qid;
        b.op = n.kind == ir::NodeKind::Break ? "" : n.op();
        b.clock = resolve_clock(t, n.code_block.clock_binding.to_string());
        b.timing_bearing = !n.code_block.constraints.empty();
        std::vector<std::string> hosts = n.kind == ir::NodeKind::SetExpand ? rt.candidates
                                                                            : std::vector<std::string>{rt.ensemble};
        for (const auto& e : hosts) {
            if (rt.period_ns > 0) b.window = rtm::Window{0, sc_.exec_bounds(e, n.op()).worst_ns, rt.period_ns};
            auto r = rtm::harmonize(staged, b, e, reg_, sc_.defaults.grid_divisions);
            if (auto* c = std::get_if<rtm::ConflictReport>(&r)) {
                add_conflict(*c);
                record("", t.name, "rejected",
                       {{"kind", rtm::conflict_kind_name(c->kind)}, {"blocks", c->blocks}, {"explanation", c->explanation}});
                return false;
            }
            const auto& a = std::get<rtm::Accept>(r);
            if (a.window) phases[{id, e}] = a.window->phase_ns;
            rtm::admit(staged, b, e, a);
        }
    }
    tenancy_ = std::move(staged);
    for (auto& [id, rt] : t.nodes)
        if (auto it = phases.find({id, rt.ensemble}); it != phases.end()) rt.phase_ns = it->second;
    return true;
}

// ---------------------------------------------------------------------------
// Dataflow

Epoch& Engine::epoch_at(std::size_t tenant, const std::string& region, std::int64_t index) {
    const EpochKey key{tenant, region, index};
    auto it = epochs_.find(key);
    if (it != epochs_.end()) return it->second;
    auto& t = tenants_[tenant];
    Epoch e;
    e.tenant = tenant;
    e.region = region;
    e.index = index;
    for (const auto& id : t.region_nodes.at(region)) {
        const auto& rt = t.nodes.at(id);
        Inst inst;
        for (const auto& f : rt.feeds) {
            const std::string& port = f.port->name;
            if (f.forward && !f.forward_same_region && (!f.loop_back || index == 0)) {
                if (auto s = t.sticky.find({id, port}); s != t.sticky.end()) {
                    inst.tokens.put(port);
                    inst.values[port] = s->second;
                }
            } else if (!f.forward && f.loop_back && index == 0) {
                Value v;
                v.truthy = f.port->initial != "0";
                inst.tokens.put(port);
                inst.values[port] = v;
            }
        }
        e.insts.emplace(id, std::move(inst));
    }
    e.remaining = e.insts.size();
    return epochs_.emplace(key, std::move(e)).first->second;
}

void Engine::start_epoch(const EpochKey& key) {
    auto& e = epochs_.at(key);
    if (e.started) return;
    e.started = true;
    auto& t = tenants_[e.tenant];
    const std::vector<std::string> order = t.region_nodes.at(e.region);
    for (const auto& id : order) {
        auto& rt = t.nodes.at(id);
        if (rt.at_clock_ns) {
            const Nanos at = *rt.at_clock_ns;
            const Nanos when = at < 0 ? -1 : clocks::true_time_at(clocks::affine_of(phys_.at(rt.ensemble)), at);
            if (when < now_) {
                record(rt.ensemble, rt.qid, "missed", {{"epoch", e.index}, {"at_clock_ns", at}});
                skip_node(key, id, "instant already past");
                continue;
            }
            schedule(when, EventKind::Wakeup, [this, key, id] {
                if (!epochs_.count(key)) return;
                epochs_.at(key).insts.at(id).ticked = true;
                try_fire(key, id);
            });
        }
    }
    for (const auto& id : order)
        if (epochs_.count(key)) try_fire(key, id);
}

void Engine::finish_node(const EpochKey& key, const std::string& node) {
    auto& e = epochs_.at(key);
    auto& inst = e.insts.at(node);
    if (inst.done) return;
    inst.done = true;
    if (--e.remaining == 0) complete_epoch(key);
}

void Engine::complete_epoch(const EpochKey& key) {
    auto node = epochs_.extract(key);
    auto& e = node.mapped();
    auto& t = tenants_[e.tenant];
    if (region_kind(e.region) != RegionKind::Loop) return;
    if (e.break_requested) {
        const auto& rt = t.nodes.at(e.break_node);
        record(rt.ensemble, t.name + "/" + e.region, "loop_exit", {{"epoch", e.index}});
        return;
    }
    const std::size_t tenant = e.tenant;
    const std::string region = e.region;
    const std::int64_t next = e.index + 1;
    schedule(now_, EventKind::Custom, [this, tenant, region, next] {
        epoch_at(tenant, region, next);
        start_epoch({tenant, region, next});
    });
}

std::set<std::string> Engine::lineage_for(const TenantRt& t, const NodeRt& n, const Inst& inst,
                                          std::int64_t firing) const {
    std::set<std::string> out;
    for (const auto& [port, v] : inst.values)
        for (const auto& tag : v.lineage) {
            const auto source = tag.substr(0, tag.rfind('#'));
            if (auto s = t.source_scope.find(source); s != t.source_scope.end() && n.latency_scopes.count(s->second))
                out.insert(tag);
        }
    if (n.latency_source) out.insert(n.qid + "#" + std::to_string(firing));
    return out;
}

void Engine::try_fire(const EpochKey& key, const std::string& id) {
    auto eit = epochs_.find(key);
    if (eit == epochs_.end() || !eit->second.started) return;
    auto& e = eit->second;
    auto& inst = e.insts.at(id);
    if (inst.started || inst.done) return;
    auto& t = tenants_[e.tenant];
    auto& rt = t.nodes.at(id);
    if ((rt.every_root || rt.at_clock_ns) && !inst.ticked) return;
    for (const auto& f : rt.feeds)
        if (!inst.tokens.ports.count(f.port->name) || !inst.tokens.ports.at(f.port->name)) return;
    for (const auto& f : rt.feeds) {
        const auto& v = inst.values.at(f.port->name);
        if (v.kind == Value::Kind::Skip) return skip_node(key, id, "input " + f.port->name + " skipped");
        if (f.port->kind == ir::Port::Kind::Guard && v.truthy != f.port->when)
            return skip_node(key, id, "guard " + f.port->name + " not taken");
    }
    inst.started = true;
    if (rt.node->kind == ir::NodeKind::SetExpand) return dispatch_group(key, id);
    if (!rt.reference.empty() && sc_.sync_enabled) return sync_then_fire(key, id);
    fire_node(key, id, rt.reference.empty() ? Json() : Json{{"sync_waived", true}});
}

void Engine::skip_node(const EpochKey& key, const std::string& id, const std::string& why) {
    auto& e = epochs_.at(key);
    auto& t = tenants_[e.tenant];
    auto& rt = t.nodes.at(id);
    e.insts.at(id).started = true;
    record(rt.ensemble, rt.qid, "skip", {{"epoch", e.index}, {"reason", why}});
    Value skip;
    skip.kind = Value::Kind::Skip;
    skip.truthy = false;
    deliver_outputs(key, id, skip, rt.ensemble);
    finish_node(key, id);
}

void Engine::fire_node(const EpochKey& key, const std::string& id, Json sync_detail) {
    auto& e = epochs_.at(key);
    const std::size_t tenant = e.tenant;
    auto& t = tenants_[tenant];
    auto& rt = t.nodes.at(id);
    auto& inst = e.insts.at(id);
    const std::int64_t k = rt.firings++;
    Value out;
    out.lineage = lineage_for(t, rt, inst, k);
    Json ports = Json::array();
    for (const auto& [p, present] : inst.tokens.ports)
        if (present) ports.push_back(p);
    Json detail{{"epoch", e.index}, {"firing", k}, {"lineage", out.lineage}, {"ports", ports}};
    if (!sync_detail.is_null())
        for (auto& [name, v] : sync_detail.items()) detail[name] = v;

    const auto& op = rt.node->op();
    if (rt.node->kind == ir::NodeKind::Break) {
        out.truthy = true;
    } else if (op == "getSensors") {
        out.kind = Value::Kind::Set;
        const auto center = sc_.target_position(now_);
        out.members = rtm::get_sensors(reg_, center, rt.radius_m, rt.recruit_capability);
        out.truthy = !out.members.empty();
        detail["center"] = {center.x_m, center.y_m};
        detail["members"] = out.members;
    } else {
        switch (sc_.truthiness(op)) {
        case Truthiness::Always: out.truthy = true; break;
        case Truthiness::Never: out.truthy = false; break;
        case Truthiness::TargetStationary: out.truthy = sc_.target_stationary(now_); break;
        }
        detail["truthy"] = out.truthy;
    }
    record(rt.ensemble, rt.qid, "fire", std::move(detail));
    ++metrics_.firings;
    const Nanos exec = exec_sample(t, id, rt.ensemble, op);
    awake_interval(rt.ensemble, now_, now_ + exec, false);
    schedule(now_ + exec, EventKind::Custom, [this, key, id, out, k] {
        auto& t2 = tenants_[std::get<0>(key)];
        auto& rt2 = t2.nodes.at(id);
        auto& e2 = epochs_.at(key);
        record(rt2.ensemble, rt2.qid, "complete", {{"epoch", e2.index}, {"firing", k}});
        if (rt2.node->kind == ir::NodeKind::Break) {
            e2.break_requested = true;
            e2.break_node = id;
        }
        deliver_outputs(key, id, out, rt2.ensemble);
        finish_node(key, id);
    });
}

bool Engine::token_valid(TenantRt& t, const std::string& ensemble, const std::string& reference, Nanos precision,
                         Nanos until) const {
    auto it = t.tokens.find({ensemble, reference});
    return it != t.tokens.end() && it->second.achieved_ns <= precision && it->second.expires_at_ns >= until;
}

void Engine::note_sync(const std::string& ensemble, const rtm::MemberSync& ms) {
    ++metrics_.sync_events;
    for (const auto& a : ms.attempts) sync_rounds_[ensemble].push_back(a.rounds);
}

void Engine::add_conflict(rtm::ConflictReport c) {
    std::string key = rtm::conflict_kind_name(c.kind);
    for (const auto& b : c.blocks) key += "|" + b;
    if (conflict_keys_.insert(key).second) metrics_.conflicts.push_back(std::move(c));
}

void Engine::sync_then_fire(const EpochKey& key, const std::string& id) {
    auto& t = tenants_[std::get<0>(key)];
    auto& rt = t.nodes.at(id);
    const auto sync_json = [&](const ir::SyncToken& tok) {
        return Json{{"sync", {{rt.sync_clock, {tok.achieved_ns, tok.expires_at_ns}}}}};
    };
    if (reg_.hosts_reference(rt.ensemble, rt.reference)) return fire_node(key, id, sync_json({0, kForever}));
    if (token_valid(t, rt.ensemble, rt.reference, rt.precision_ns, now_))
        return fire_node(key, id, sync_json(t.tokens.at({rt.ensemble, rt.reference})));
    auto staged = vclock(t, rt.ensemble, rt.reference);
    const auto& ens = reg_.ensembles.at(rt.ensemble);
    const std::string base = t.name + "/sync/" + rt.ensemble;
    rtm::MemberSync ms;
    try {
        ms = rtm::sync_member(rt.ensemble, staged, reg_.reference_clocks.at(rt.reference), rt.precision_ns,
                              reg_.links.at(ens.link), reg_.power_models.at(ens.power), params_,
                              {&stream(base + "/link"), &stream(base + "/read"), &stream(base + "/reference")}, now_);
    } catch (const Error& err) {
        record(rt.ensemble, rt.qid, "sync_failed", {{"reason", err.what()}});
        add_conflict({rtm::ConflictReport::Kind::PrecisionUnachievable, {rt.qid}, err.what()});
        return skip_node(key, id, "sync failed");
    }
    schedule(ms.completed_at_true_ns, EventKind::ClockSync, [this, key, id, staged, ms, sync_json] {
        auto& t2 = tenants_[std::get<0>(key)];
        auto& rt2 = t2.nodes.at(id);
        vclock(t2, rt2.ensemble, rt2.reference) = staged;
        t2.tokens[{rt2.ensemble, rt2.reference}] = ms.token;
        note_sync(rt2.ensemble, ms);
        awake_interval(rt2.ensemble, ms.attempts.front().started_at_true_ns, now_, false);
        record(rt2.ensemble, rt2.qid, "sync",
               {{"reference", rt2.reference},
                {"achieved_ns", ms.token.achieved_ns},
                {"attempts", ms.attempts.size()},
                {"rounds", ms.attempts.back().rounds},
                {"expires_at_ns", ms.token.expires_at_ns}});
        fire_node(key, id, sync_json(ms.token));
    });
}

void Engine::deliver_outputs(const EpochKey& key, const std::string& id, const Value& value, const std::string& from) {
    const std::size_t tenant = std::get<0>(key);
    auto& t = tenants_[tenant];
    const auto& rt = t.nodes.at(id);
    for (const auto* edge : rt.out) {
        const auto& consumer = t.nodes.at(edge->consumer);
        const bool cross = consumer.region != rt.region;
        const EpochKey target{tenant, consumer.region, std::get<2>(key) + (edge->loop_back ? 1 : 0)};
        const std::string port = edge->port;
        const std::string cid = edge->consumer;
        auto arrive = [this, tenant, target, cid, port, value, cross] {
            if (cross)
                put_sticky(tenant, cid, port, value);
            else
                put(tenant, target, cid, port, value);
        };
        if (consumer.ensemble == from) {
            arrive();
            continue;
        }
        const auto& link = reg_.links.at(reg_.ensembles.at(from).link);
        const Nanos latency = sample_latency(link, stream(t.name + "/link/" + link.id + "/msg"));
        const std::string producer = rt.qid;
        schedule(now_ + latency, EventKind::MessageDeliver,
                 [this, tenant, arrive, latency, producer, port, cid, link_id = link.id, epoch = std::get<2>(target)] {
                     auto& t2 = tenants_[tenant];
                     const auto& c = t2.nodes.at(cid);
                     record(c.ensemble, c.qid, "deliver",
                            {{"epoch", epoch}, {"from", producer}, {"port", port}, {"latency_ns", latency}});
                     rtm::feedback_update(t2.feedback, {{link_id, {latency}}});
                     arrive();
                 });
    }
}

void Engine::put(std::size_t tenant, const EpochKey& key, const std::string& consumer, const std::string& port,
                 Value v) {
    auto& e = epoch_at(tenant, std::get<1>(key), std::get<2>(key));
    auto& inst = e.insts.at(consumer);
    if (inst.started || inst.done) return;
    inst.tokens.put(port);
    inst.values[port] = std::move(v);
    if (e.started) try_fire(key, consumer);
}

void Engine::put_sticky(std::size_t tenant, const std::string& consumer, const std::string& port, Value v) {
    auto& t = tenants_[tenant];
    t.sticky[{consumer, port}] = v;
    const auto& rt = t.nodes.at(consumer);
    bool has_loop_back = false;
    for (const auto& f : rt.feeds)
        if (f.port->name == port && f.loop_back) has_loop_back = true;
    std::vector<EpochKey> keys;
    for (const auto& [key, e] : epochs_)
        if (e.tenant == tenant && e.region == rt.region && (!has_loop_back || e.index == 0)) keys.push_back(key);
    for (const auto& key : keys) {
        if (!epochs_.count(key)) continue;
        auto& inst = epochs_.at(key).insts.at(consumer);
        if (!inst.tokens.ports.count(port)) put(tenant, key, consumer, port, v);
    }
}

void Engine::tick(std::size_t tenant, const std::string& id, std::int64_t k) {
    auto& t = tenants_[tenant];
    auto& rt = t.nodes.at(id);
    if (k > 0 && epochs_.count(EpochKey{tenant, rt.region, k - 1})) {
        ++metrics_.overruns;
        record(rt.ensemble, rt.qid, "overrun", {{"epoch", k - 1}});
    }
    auto& e = epoch_at(tenant, rt.region, k);
    e.insts.at(id).ticked = true;
    const EpochKey key{tenant, rt.region, k};
    if (!e.started)
        start_epoch(key);
    else
        try_fire(key, id);
    const Nanos next = clocks::true_time_at(clocks::affine_of(phys_.at(rt.ensemble)), (k + 1) * rt.period_ns + rt.phase_ns);
    schedule(next, EventKind::Wakeup, [this, tenant, id, k] { tick(tenant, id, k + 1); });
}

// ---------------------------------------------------------------------------
// Simultaneity groups

void Engine::dispatch_group(const EpochKey& key, const std::string& id) {
    auto& e = epochs_.at(key);
    auto& t = tenants_[e.tenant];
    auto& rt = t.nodes.at(id);
    auto& inst = e.insts.at(id);
    const auto& set_port = rt.node->firing_rule.ports.front().name;
    const auto& set = inst.values.at(set_port);

    std::vector<std::string> members;
    for (const auto& m : set.members)
        if (reg_.ensembles.at(m).capabilities.count(rt.node->op())) members.push_back(m);
    std::sort(members.begin(), members.end());
    rtm::Recruitment r;
    std::set_difference(members.begin(), members.end(), rt.previous_members.begin(), rt.previous_members.end(),
                        std::back_inserter(r.joined));
    std::set_difference(rt.previous_members.begin(), rt.previous_members.end(), members.begin(), members.end(),
                        std::back_inserter(r.departed));
    std::set_intersection(members.begin(), members.end(), rt.previous_members.begin(), rt.previous_members.end(),
                          std::back_inserter(r.retained));
    record(rt.ensemble, rt.qid, "recruit",
           {{"epoch", e.index}, {"joined", r.joined}, {"departed", r.departed}, {"retained", r.retained}});
    for (const auto& d : r.departed) {
        if (t.tokens.erase({d, rt.reference}))
            record(d, ir::instance_id(rt.qid, d), "token_revoked", {{"reference", rt.reference}});
    }
    rt.previous_members = members;

    if (members.empty()) {
        record(rt.ensemble, rt.qid, "group_empty", {{"epoch", e.index}});
        Value skip;
        skip.kind = Value::Kind::Skip;
        skip.truthy = false;
        deliver_outputs(key, id, skip, rt.ensemble);
        return finish_node(key, id);
    }

    const Nanos g = guard(t, rt.ensemble);
    Nanos need = 0;
    for (const auto& m : members) {
        const Nanos cmd = m == rt.ensemble ? 0 : link_latency_estimate(t, rt.ensemble);
        const Nanos overhead = sc_.sync_enabled ? sync_overhead(t, m, rt.reference, rt.precision_ns) : 0;
        const Nanos unc = reg_.hosts_reference(m, rt.reference)
                              ? 0
                              : clocks::current_uncertainty(vclock(t, m, rt.reference), now_,
                                                            sc_.defaults.unsynced_uncertainty_ns);
        need = std::max(need, cmd + overhead + unc);
    }
    const Nanos lead = need + 2 * g;
    const Nanos target =
        static_cast<Nanos>(std::llroundl(clocks::ideal_read(reg_.reference_clocks.at(rt.reference), now_))) + lead;

    const int gid = next_group_++;
    GroupRun gr;
    gr.tenant = e.tenant;
    gr.epoch = key;
    gr.node = id;
    gr.target_clock_ns = target;
    gr.remaining = members.size();
    gr.lineage = lineage_for(t, rt, inst, rt.firings);
    for (const auto& m : members) gr.members[m] = MemberRun{m, ir::instance_id(rt.qid, m)};
    groups_.emplace(gid, std::move(gr));
    record(rt.ensemble, rt.qid, "dispatch",
           {{"epoch", e.index},
            {"group", rt.group},
            {"reference", rt.reference},
            {"target_clock_ns", target},
            {"lead_ns", lead},
            {"members", members}});

    // Consumers gather one result per member.
    for (const auto* edge : rt.out) {
        const auto& c = t.nodes.at(edge->consumer);
        auto& ce = epoch_at(e.tenant, c.region, std::get<2>(key) + (edge->loop_back ? 1 : 0));
        ce.insts.at(edge->consumer).gathers[edge->port].expected += members.size();
    }

    const auto& link = reg_.links.at(reg_.ensembles.at(rt.ensemble).link);
    for (const auto& m : members) {
        if (m == rt.ensemble) {
            member_on_command(gid, m);
            continue;
        }
        const Nanos latency = sample_latency(link, stream(t.name + "/link/" + link.id + "/msg"));
        schedule(now_ + latency, EventKind::MessageDeliver, [this, gid, m, latency, link_id = link.id] {
            auto& g2 = groups_.at(gid);
            auto& t2 = tenants_[g2.tenant];
            record(m, g2.members.at(m).inst_qid, "deliver",
                   {{"epoch", std::get<2>(g2.epoch)},
                    {"from", t2.nodes.at(g2.node).qid},
                    {"port", "command"},
                    {"latency_ns", latency}});
            rtm::feedback_update(t2.feedback, {{link_id, {latency}}});
            member_on_command(gid, m);
        });
    }
}

void Engine::member_on_command(int gid, const std::string& m) {
    auto& g = groups_.at(gid);
    auto& t = tenants_[g.tenant];
    const auto& rt = t.nodes.at(g.node);
    auto& mr = g.members.at(m);
    auto& vc = vclock(t, m, rt.reference);
    const auto aff = clocks::affine_of(vc);
    const bool self_hosted = reg_.hosts_reference(m, rt.reference);
    const Nanos action = clocks::true_time_at(aff, g.target_clock_ns);
    mr.needs_sync = sc_.sync_enabled && !self_hosted && !token_valid(t, m, rt.reference, rt.precision_ns, action);
    const Nanos overhead = mr.needs_sync ? sync_overhead(t, m, rt.reference, rt.precision_ns) : 0;
    const Nanos unc =
        self_hosted ? 0 : clocks::current_uncertainty(vc, now_, sc_.defaults.unsynced_uncertainty_ns);
    const Nanos now_local = static_cast<Nanos>(std::llroundl(clocks::ideal_read(vc, now_)));
    Nanos wake = now_local;
    try {
        wake = clocks::wakeup_plan(g.target_clock_ns, overhead, unc, guard(t, m), now_local);
    } catch (const clocks::TooLate& late) {
        record(m, mr.inst_qid, "too_late", {{"wake_clock_ns", late.wake_at_ns}, {"now_clock_ns", late.now_ns}});
    }
    schedule(std::max(now_, clocks::true_time_at(aff, wake)), EventKind::Wakeup, [this, gid, m] { member_on_wake(gid, m); });
}

void Engine::member_on_wake(int gid, const std::string& m) {
    auto& g = groups_.at(gid);
    auto& t = tenants_[g.tenant];
    const auto& rt = t.nodes.at(g.node);
    auto& mr = g.members.at(m);
    mr.awake = true;
    mr.awake_from = now_;
    record(m, mr.inst_qid, "wake", {{"epoch", std::get<2>(g.epoch)}, {"group", rt.group}});
    if (rt.precision_ns <= sc_.defaults.high_precision_threshold_ns) {
        mr.high = true;
        vclock(t, m, rt.reference).precision_mode = clocks::PrecisionMode::High;
        record(m, mr.inst_qid, "mode_high", Json::object());
    }
    const Nanos action = clocks::true_time_at(clocks::affine_of(vclock(t, m, rt.reference)), g.target_clock_ns);
    if (mr.needs_sync && !token_valid(t, m, rt.reference, rt.precision_ns, action))
        member_sync(gid, m);
    else
        member_after_sync(gid, m);
}

void Engine::member_sync(int gid, const std::string& m) {
    auto& g = groups_.at(gid);
    auto& t = tenants_[g.tenant];
    const auto& rt = t.nodes.at(g.node);
    auto staged = vclock(t, m, rt.reference);
    const auto& ens = reg_.ensembles.at(m);
    const std::string base = t.name + "/sync/" + m;
    rtm::MemberSync ms;
    try {
        ms = rtm::sync_member(m, staged, reg_.reference_clocks.at(rt.reference), rt.precision_ns,
                              reg_.links.at(ens.link), reg_.power_models.at(ens.power), params_,
                              {&stream(base + "/link"), &stream(base + "/read"), &stream(base + "/reference")}, now_,
                              3, clocks::true_time_at(clocks::affine_of(staged), g.target_clock_ns));
    } catch (const rtm::PrecisionUnachievable& err) {
        add_conflict({rtm::ConflictReport::Kind::PrecisionUnachievable, {g.members.at(m).inst_qid}, err.what()});
        return member_fail(gid, m, err.what());
    } catch (const Error& err) {
        return member_fail(gid, m, err.what());
    }
    schedule(ms.completed_at_true_ns, EventKind::ClockSync, [this, gid, m, staged, ms] {
        auto& g2 = groups_.at(gid);
        auto& t2 = tenants_[g2.tenant];
        const auto& rt2 = t2.nodes.at(g2.node);
        auto& vc = vclock(t2, m, rt2.reference);
        const auto mode = vc.precision_mode;
        vc = staged;
        vc.precision_mode = mode;
        t2.tokens[{m, rt2.reference}] = ms.token;
        note_sync(m, ms);
        int rounds = 0;
        for (const auto& a : ms.attempts) rounds += a.rounds;
        record(m, g2.members.at(m).inst_qid, "sync",
               {{"reference", rt2.reference},
                {"achieved_ns", ms.token.achieved_ns},
                {"attempts", ms.attempts.size()},
                {"rounds", rounds},
                {"expires_at_ns", ms.token.expires_at_ns}});
        member_after_sync(gid, m);
    });
}

void Engine::member_after_sync(int gid, const std::string& m) {
    auto& g = groups_.at(gid);
    auto& t = tenants_[g.tenant];
    const auto& rt = t.nodes.at(g.node);
    auto& mr = g.members.at(m);
    auto& vc = vclock(t, m, rt.reference);
    const auto aff = clocks::affine_of(vc);
    const bool self_hosted = reg_.hosts_reference(m, rt.reference);
    std::optional<ir::SyncToken> token;
    if (self_hosted)
        token = ir::SyncToken{0, kForever};
    else if (auto it = t.tokens.find({m, rt.reference}); it != t.tokens.end())
        token = it->second;

    if (sc_.sync_enabled) {
        const Nanos action = clocks::true_time_at(aff, g.target_clock_ns);
        if (!token || token->expires_at_ns < action) {
            ++mr.expirations;
            ++metrics_.token_expirations;
            record(m, mr.inst_qid, "token_expired",
                   {{"expires_at_ns", token ? token->expires_at_ns : 0}, {"action_at_ns", action}});
            if (mr.expirations > 2) return member_fail(gid, m, "sync token keeps expiring before the target instant");
            // Sleep again and resync just in time, or right away if that
            // still fits before the target.
            const Nanos now_local = static_cast<Nanos>(std::llroundl(clocks::ideal_read(vc, now_)));
            Nanos wake = now_local;
            try {
                wake = clocks::wakeup_plan(g.target_clock_ns, sync_overhead(t, m, rt.reference, rt.precision_ns),
                                           clocks::current_uncertainty(vc, now_, sc_.defaults.unsynced_uncertainty_ns),
                                           guard(t, m), now_local);
            } catch (const clocks::TooLate&) {
                if (now_ + sync_overhead(t, m, rt.reference, rt.precision_ns, 1) >= action)
                    return member_fail(gid, m, "no time left to resync before the target instant");
            }
            schedule(std::max(now_, clocks::true_time_at(aff, wake)), EventKind::Wakeup,
                     [this, gid, m] { member_sync(gid, m); });
            return;
        }
    }

    SimultaneousMember sm;
    sm.node = mr.inst_qid;
    sm.clock = aff;
    sm.token = token;
    const double jitter = vc.effective_jitter_std();
    if (jitter > 0) sm.read_jitter_ns = std::llround(jitter * stream(t.name + "/read/" + m).normal());
    Nanos at = now_;
    try {
        at = execute_simultaneous({sm}, g.target_clock_ns, sc_.sync_enabled).at(sm.node);
    } catch (const SyncTokenExpired& err) {
        return member_fail(gid, m, err.what());
    }
    if (at < now_) return member_fail(gid, m, "target instant already passed");
    schedule(at, EventKind::NodeFire, [this, gid, m, jitter_ns = sm.read_jitter_ns] {
        auto& g2 = groups_.at(gid);
        g2.members.at(m);
        member_fire(gid, m);
        (void)jitter_ns;
    });
}

void Engine::member_fire(int gid, const std::string& m) {
    auto& g = groups_.at(gid);
    auto& t = tenants_[g.tenant];
    auto& rt = t.nodes.at(g.node);
    auto& mr = g.members.at(m);
    auto& vc = vclock(t, m, rt.reference);
    const auto& inst = epochs_.at(g.epoch).insts.at(g.node);

    Json detail{{"epoch", std::get<2>(g.epoch)}, {"firing", rt.firings}, {"lineage", g.lineage}};
    Json ports = Json::array();
    for (const auto& [p, present] : inst.tokens.ports)
        if (present) ports.push_back(p);
    detail["ports"] = ports;
    if (sc_.sync_enabled) {
        ir::TokenState state = inst.tokens;
        ir::SyncToken tok{0, kForever};
        if (!reg_.hosts_reference(m, rt.reference)) tok = t.tokens.at({m, rt.reference});
        state.put_sync(rt.sync_clock, tok);
        if (!ir::firing_ready(*rt.node, state, now_)) return member_fail(gid, m, "firing rule not satisfied");
        detail["sync"] = {{rt.sync_clock, {tok.achieved_ns, tok.expires_at_ns}}};
    } else {
        detail["sync_waived"] = true;
    }
    detail["group"] = rt.group;
    detail["target_clock_ns"] = g.target_clock_ns;
    detail["virtual_clock_ns"] = static_cast<Nanos>(std::llroundl(clocks::ideal_read(vc, now_)));
    record(m, mr.inst_qid, "fire", std::move(detail));
    ++metrics_.firings;
    mr.fired = true;
    mr.action_true_ns = now_;
    const Nanos exec = exec_sample(t, rt.node->id + "[" + m + "]", m, rt.node->op());
    schedule(now_ + exec, EventKind::Custom, [this, gid, m] {
        auto& g2 = groups_.at(gid);
        auto& t2 = tenants_[g2.tenant];
        auto& rt2 = t2.nodes.at(g2.node);
        auto& mr2 = g2.members.at(m);
        record(m, mr2.inst_qid, "complete", {{"epoch", std::get<2>(g2.epoch)}});
        member_sleep(g2, mr2);
        for (const auto* edge : rt2.out) {
            const auto& c = t2.nodes.at(edge->consumer);
            const EpochKey ck{g2.tenant, c.region, std::get<2>(g2.epoch) + (edge->loop_back ? 1 : 0)};
            const std::string cid = edge->consumer, port = edge->port;
            const auto lineage = g2.lineage;
            if (c.ensemble == m) {
                gather_arrive(ck, cid, port, &m, lineage);
                continue;
            }
            const auto& link = reg_.links.at(reg_.ensembles.at(m).link);
            const Nanos latency = sample_latency(link, stream(t2.name + "/link/" + link.id + "/msg"));
            const std::string producer = g2.members.at(m).inst_qid;
            schedule(now_ + latency, EventKind::MessageDeliver,
                     [this, ck, cid, port, m, lineage, latency, producer, tenant = g2.tenant, link_id = link.id] {
                         auto& t3 = tenants_[tenant];
                         const auto& c3 = t3.nodes.at(cid);
                         record(c3.ensemble, c3.qid, "deliver",
                                {{"epoch", std::get<2>(ck)}, {"from", producer}, {"port", port}, {"latency_ns", latency}});
                         rtm::feedback_update(t3.feedback, {{link_id, {latency}}});
                         gather_arrive(ck, cid, port, &m, lineage);
                     });
        }
        member_done(gid, m);
    });
}

void Engine::member_sleep(GroupRun& g, MemberRun& mr) {
    if (!mr.awake) return;
    auto& t = tenants_[g.tenant];
    const auto& rt = t.nodes.at(g.node);
    awake_interval(mr.ensemble, mr.awake_from, now_, mr.high);
    if (mr.high) {
        vclock(t, mr.ensemble, rt.reference).precision_mode = clocks::PrecisionMode::Low;
        record(mr.ensemble, mr.inst_qid, "mode_low", Json::object());
    }
    mr.awake = false;
    if (reg_.ensembles.at(mr.ensemble).mostly_off) record(mr.ensemble, mr.inst_qid, "sleep", Json::object());
}

void Engine::member_fail(int gid, const std::string& m, const std::string& why) {
    auto& g = groups_.at(gid);
    auto& t = tenants_[g.tenant];
    auto& rt = t.nodes.at(g.node);
    auto& mr = g.members.at(m);
    mr.failed = true;
    record(m, mr.inst_qid, "abandon", {{"epoch", std::get<2>(g.epoch)}, {"reason", why}});
    member_sleep(g, mr);
    for (const auto* edge : rt.out) {
        const auto& c = t.nodes.at(edge->consumer);
        gather_arrive({g.tenant, c.region, std::get<2>(g.epoch) + (edge->loop_back ? 1 : 0)}, edge->consumer,
                      edge->port, nullptr, {});
    }
    member_done(gid, m);
}

void Engine::member_done(int gid, const std::string&) {
    auto& g = groups_.at(gid);
    if (--g.remaining > 0) return;
    auto& t = tenants_[g.tenant];
    auto& rt = t.nodes.at(g.node);
    std::map<std::string, Nanos> times;
    bool complete = true;
    for (const auto& [m, mr] : g.members) {
        if (mr.fired)
            times[mr.inst_qid] = mr.action_true_ns;
        else
            complete = false;
    }
    const auto s = measure_simultaneity(times);
    Json dev = Json::object();
    for (const auto& [n, d] : s.deviations_ns) dev[n] = d;
    record(rt.ensemble, rt.qid, "group",
           {{"epoch", std::get<2>(g.epoch)},
            {"group", rt.group},
            {"complete", complete},
            {"spread_ns", s.spread_ns},
            {"deviations_ns", dev}});
    if (complete)
        metrics_.spread_ns_by_group[rt.group].push_back(s.spread_ns);
    else
        ++metrics_.incomplete_groups;
    ++rt.firings;
    const EpochKey key = g.epoch;
    const std::string node = g.node;
    groups_.erase(gid);
    finish_node(key, node);
}

void Engine::gather_arrive(const EpochKey& key, const std::string& consumer, const std::string& port,
                           const std::string* member, const std::set<std::string>& lineage) {
    auto& e = epoch_at(std::get<0>(key), std::get<1>(key), std::get<2>(key));
    auto& gather = e.insts.at(consumer).gathers[port];
    ++gather.received;
    if (member) gather.members.push_back(*member);
    gather.lineage.insert(lineage.begin(), lineage.end());
    if (gather.received < gather.expected) return;
    Value v;
    if (gather.members.empty()) {
        v.kind = Value::Kind::Skip;
        v.truthy = false;
    } else {
        v.kind = Value::Kind::Set;
        v.members = gather.members;
        std::sort(v.members.begin(), v.members.end());
    }
    v.lineage = gather.lineage;
    put(std::get<0>(key), key, consumer, port, std::move(v));
}

// ---------------------------------------------------------------------------
// Run

void Engine::finalize(RunResult& out) {
    for (const auto& [id, e] : reg_.ensembles) {
        std::vector<std::pair<Nanos, int>> awake_edges, high_edges;
        for (const auto& iv : awake_[id]) {
            const Nanos a = std::clamp<Nanos>(iv.from, 0, until_), b = std::clamp<Nanos>(iv.to, 0, until_);
            if (b <= a) continue;
            awake_edges.push_back({a, +1});
            awake_edges.push_back({b, -1});
            if (iv.high) {
                high_edges.push_back({a, +1});
                high_edges.push_back({b, -1});
            }
        }
        std::vector<Nanos> cuts{0, until_};
        for (const auto& [t, d] : awake_edges) cuts.push_back(t);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        std::sort(awake_edges.begin(), awake_edges.end());
        std::sort(high_edges.begin(), high_edges.end());
        std::vector<clocks::TimelineEntry> timeline;
        std::size_t ai = 0, hi = 0;
        int awake = 0, high = 0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            while (ai < awake_edges.size() && awake_edges[ai].first <= cuts[i]) awake += awake_edges[ai++].second;
            while (hi < high_edges.size() && high_edges[hi].first <= cuts[i]) high += high_edges[hi++].second;
            const bool idle = awake > 0 || !e.mostly_off;
            timeline.push_back(clocks::ModeInterval{cuts[i], cuts[i + 1],
                                                    idle ? clocks::PowerState::Idle : clocks::PowerState::Sleep,
                                                    high > 0});
        }
        for (int rounds : sync_rounds_[id]) timeline.push_back(clocks::SyncEvent{rounds});
        metrics_.energy_nj_by_ensemble[id] = clocks::energy_of_schedule(reg_.power_models.at(e.power), timeline);
    }
    for (const auto& t : tenants_) {
        for (const auto& p : t.latency_paths) {
            const auto check = check_latency(trace_, ir::Latency{p.bound_ns, t.name + "/" + p.scope},
                                             t.name + "/" + p.source, t.name + "/" + p.sink);
            metrics_.latency_violations.insert(metrics_.latency_violations.end(), check.violations.begin(),
                                               check.violations.end());
            metrics_.unmatched_firings.insert(metrics_.unmatched_firings.end(), check.unmatched.begin(),
                                              check.unmatched.end());
        }
        for (const auto& [k, c] : t.vclocks) out.corrections[t.name + "/" + k.first + "/" + k.second] = c.correction;
    }
    out.trace = std::move(trace_);
    out.metrics = std::move(metrics_);
}

RunResult Engine::execute(const std::vector<Tenant>& tenants) {
    sc_.check();
    if (until_ <= 0) throw Error("horizon must be positive");
    std::set<std::string> names;
    for (const auto& t : tenants) {
        if (!names.insert(t.name).second) throw Error("duplicate tenant name " + t.name);
        if (t.name.empty() || t.name.find('/') != std::string::npos) throw Error("invalid tenant name '" + t.name + "'");
        prepare(t);
    }
    RunResult out;
    std::vector<std::size_t> admitted;
    for (std::size_t i = 0; i < tenants_.size(); ++i) {
        auto& t = tenants_[i];
        if (!admit_tenant(t)) {
            out.rejected.push_back(t.name);
            continue;
        }
        out.admitted.push_back(t.name);
        admitted.push_back(i);
    }
    for (std::size_t i : admitted) {
        auto& t = tenants_[i];
        for (const auto& [region, ids] : t.region_nodes) {
            const auto kind = region_kind(region);
            if (kind == RegionKind::Every) {
                for (const auto& id : ids) {
                    const auto& rt = t.nodes.at(id);
                    if (!rt.every_root) continue;
                    const Nanos first = clocks::true_time_at(clocks::affine_of(phys_.at(rt.ensemble)), rt.phase_ns);
                    schedule(first, EventKind::Wakeup, [this, i, id] { tick(i, id, 0); });
                }
            } else {
                schedule(0, EventKind::Custom, [this, i, region] {
                    epoch_at(i, region, 0);
                    start_epoch({i, region, 0});
                });
            }
        }
    }
    std::int64_t events = 0;
    while (!queue_.empty()) {
        if (queue_.next_time() >= until_) {
            metrics_.horizon_exceeded = true;
            break;
        }
        if (++events > sc_.defaults.max_events) {
            metrics_.event_budget_exhausted = true;
            break;
        }
        auto ev = queue_.pop();
        now_ = ev.true_time_ns;
        ev.payload();
    }
    now_ = until_;
    finalize(out);
    return out;
}

}  // namespace

RunResult run(const Scenario& scenario, const std::vector<Tenant>& tenants, std::uint64_t seed, Nanos until_ns) {
    Engine engine(scenario, seed, until_ns);
    return engine.execute(tenants);
}

RunResult run(const Scenario& scenario, const ir::DataflowGraph& graph, std::uint64_t seed, Nanos until_ns) {
    Tenant t;
    t.graph = graph;
    return run(scenario, {t}, seed, until_ns);
}

}  // namespace ticktalk::sim
