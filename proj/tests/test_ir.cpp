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


#include <random>

#include "corpus.hpp"
#include "doctest.h"
#include "ticktalk/ir/firing.hpp"
#include "ticktalk/ir/lower.hpp"
#include "ticktalk/ir/serialize.hpp"

using namespace ticktalk;
using namespace ticktalk::ir;
using ticktalk::testing::corpus;
using ticktalk::testing::corpus_files;
using ticktalk::testing::read_file;

namespace {

const GraphNode& by_op(const DataflowGraph& g, const std::string& op) {
    for (const auto& n : g.nodes)
        if (n.op() == op) return n;
    FAIL("no node with op " << op);
    throw;
}

std::multiset<std::string> ops(const DataflowGraph& g) {
    std::multiset<std::string> out;
    for (const auto& n : g.nodes) out.insert(n.op());
    return out;
}

bool has_edge(const DataflowGraph& g, const std::string& from_op, const std::string& to_op, bool loop_back = false) {
    const auto& from = by_op(g, from_op);
    const auto& to = by_op(g, to_op);
    for (const auto& e : g.data_edges)
        if (e.producer == from.id && e.consumer == to.id && e.loop_back == loop_back) return true;
    return false;
}

}  // namespace

TEST_SUITE("lower") {
    TEST_CASE("tracking program") {
        auto g = compile_source(corpus("tracking.tt"));
        CHECK(ops(g) == std::multiset<std::string>{"getSensors", "captureImage", "create3DImage", "addImage",
                                                   "predictNextPosition", "break"});
        const auto& capture = by_op(g, "captureImage");
        CHECK(capture.kind == NodeKind::SetExpand);
        CHECK(capture.multiplicity == 0);
        REQUIRE(g.simultaneity_groups.size() == 1);
        CHECK(g.simultaneity_groups.begin()->second == std::set<std::string>{capture.id});
        REQUIRE(g.sync_deps.size() == 1);
        CHECK(g.sync_deps[0] == SyncDep{capture.id, "self", 1000});
        CHECK(capture.firing_rule.sync == std::vector<SyncRequirement>{{"self", 1000}});
        const auto* sync = capture.code_block.find<Synchronize>();
        REQUIRE(sync);
        CHECK(sync->precision_ns == 1000);
        CHECK(capture.code_block.find<Simultaneous>());

        CHECK(has_edge(g, "getSensors", "captureImage"));
        CHECK(has_edge(g, "captureImage", "create3DImage"));
        CHECK(has_edge(g, "captureImage", "predictNextPosition"));
        CHECK(has_edge(g, "create3DImage", "addImage"));
        CHECK(has_edge(g, "predictNextPosition", "break"));
        const auto& brk = by_op(g, "break");
        REQUIRE(brk.firing_rule.ports.size() == 1);
        CHECK(brk.firing_rule.ports[0].kind == Port::Kind::Guard);
        CHECK(brk.firing_rule.ports[0].when);

        // getSensors reads the ambient position and a literal radius.
        const auto& gs = by_op(g, "getSensors");
        CHECK(gs.code_block.params == std::vector<std::string>{"100"});
        CHECK(gs.args[0].kind == Arg::Kind::Ambient);
        for (const auto& n : g.nodes) CHECK(n.region == "loop0");
    }

    TEST_CASE("single statement") {
        auto g = compile_source("x = poll();");
        REQUIRE(g.nodes.size() == 1);
        CHECK(g.data_edges.empty());
        CHECK(g.nodes[0].code_block.constraints.empty());
        CHECK(g.nodes[0].firing_rule.ports.empty());
    }

    TEST_CASE("def-use chain") {
        // Hand-run of the lowering rules: f defines a, g reads a and defines b,
        // h reads a and b.
        auto g = compile_source(corpus("def_use.tt"));
        REQUIRE(g.nodes.size() == 3);
        CHECK(g.data_edges.size() == 3);
        CHECK(has_edge(g, "f", "g"));
        CHECK(has_edge(g, "f", "h"));
        CHECK(has_edge(g, "g", "h"));
        const auto& h = by_op(g, "h");
        REQUIRE(h.firing_rule.ports.size() == 2);
        CHECK(h.firing_rule.ports[0].name == "a");
        CHECK(h.firing_rule.ports[1].name == "b");
    }

    TEST_CASE("repeated argument uses one port") {
        auto g = compile_source("a = f(); h(a, a);");
        CHECK(by_op(g, "h").firing_rule.ports.size() == 1);
        CHECK(g.data_edges.size() == 1);
    }

    TEST_CASE("timing blocks attach constraints") {
        auto every = compile_source(corpus("every_poll.tt"));
        const auto* f = every.nodes.at(0).code_block.find<Frequency>();
        REQUIRE(f);
        CHECK(f->period_ns == 100 * kNanosPerMilli);
        CHECK(every.nodes[0].region == f->scope);

        auto within = compile_source(corpus("latency_pipeline.tt"));
        for (const auto& n : within.nodes) {
            const auto* l = n.code_block.find<Latency>();
            REQUIRE(l);
            CHECK(l->bound_ns == 1000 * kNanosPerMilli);
        }

        auto at = compile_source(corpus("at_time.tt"));
        const auto* a = at.nodes.at(0).code_block.find<AtTime>();
        REQUIRE(a);
        CHECK(a->instant.ns == (16LL * 3600 + 35 * 60) * kNanosPerSecond);
        CHECK(a->clock.is_self());

        auto named = compile_source(corpus("named_clock.tt"));
        CHECK(by_op(named, "captureImage").code_block.clock_binding == ClockRef::named("gps"));
        CHECK(named.sync_deps.at(0).clock == "gps");
    }

    TEST_CASE("two sync blocks give two disjoint groups") {
        auto g = compile_source(corpus("two_sync_groups.tt"));
        auto groups = simultaneity_groups(g);
        REQUIRE(groups.size() == 2);
        const auto& a = groups.at("g0");
        const auto& b = groups.at("g1");
        CHECK(a.size() == 1);
        CHECK(b.size() == 1);
        CHECK(*a.begin() != *b.begin());
        CHECK(g.sync_deps.size() == 2);
    }

    TEST_CASE("no simultaneously calls, no groups") {
        CHECK(simultaneity_groups(compile_source(corpus("def_use.tt"))).empty());
    }

    TEST_CASE("loop-carried value becomes a loop-back edge") {
        auto g = compile_source(corpus("loop_carried.tt"));
        CHECK(has_edge(g, "startPosition", "step"));
        CHECK(has_edge(g, "step", "step", true));
        CHECK(has_edge(g, "step", "arrived"));
        CHECK_NOTHROW(g.topological_order());
    }

    TEST_CASE("loop-carried ambient gets an initial value") {
        auto g = compile_source("loop { p = step(x); x = p; }");
        const auto& step = by_op(g, "step");
        REQUIRE(step.firing_rule.ports.size() == 1);
        CHECK(step.firing_rule.ports[0].initial == "x");
        CHECK(has_edge(g, "step", "step", true));
    }

    TEST_CASE("nested calls lower into temporaries") {
        auto g = compile_source(corpus("nested_calls.tt"));
        CHECK(ops(g).count("captureImage") == 2);
        const auto& model = by_op(g, "create3DImage");
        CHECK(model.firing_rule.ports.size() == 2);
        CHECK(g.inbound(model.id).size() == 2);
    }

    TEST_CASE("conditional branches carry guards") {
        auto g = compile_source(corpus("conditional.tt"));
        const auto& alarm = by_op(g, "alarm");
        const auto& log = by_op(g, "logReading");
        auto guard = [](const GraphNode& n) {
            for (const auto& p : n.firing_rule.ports)
                if (p.kind == Port::Kind::Guard) return p;
            FAIL("no guard");
            throw;
        };
        CHECK(guard(alarm).when);
        CHECK_FALSE(guard(log).when);
    }

    TEST_CASE("statements after a conditional break are guarded") {
        auto g = compile_source("loop { v = poll(); if (v) { break; } report(v); }");
        const auto& report = by_op(g, "report");
        bool guarded = false;
        for (const auto& p : report.firing_rule.ports) guarded |= p.kind == Port::Kind::Guard && !p.when;
        CHECK(guarded);
    }

    TEST_CASE("lowering errors") {
        // produced inside the loop, consumed after it
        CHECK_THROWS_AS(compile_source("loop { a = f(); break; } g(a);"), LoweringError);
        // produced inside a periodic block, consumed outside it
        CHECK_THROWS_AS(compile_source("every(10ms) { a = f(); } g(a);"), LoweringError);
        // conditionally produced in both branches, then consumed
        CHECK_THROWS_AS(compile_source("v = poll(); if (v) { w = f(); } else { w = g(); } h(w);"), LoweringError);
        // condition on an ambient input
        CHECK_THROWS_AS(compile_source("if (x) { f(); }"), LoweringError);
        // set expansion over an ambient
        CHECK_THROWS_AS(compile_source("withSynchronization(x, 1us, self) { a = simultaneously(x.m()); }"),
                        LoweringError);
        CHECK_THROWS_AS(compile_source("loop { break; f(); }"), LoweringError);
    }

    TEST_CASE("constant conditions select a branch") {
        auto g = compile_source("if (1) { f(); } else { g(); }");
        CHECK(ops(g) == std::multiset<std::string>{"f"});
    }

    TEST_CASE("expand specializes set nodes for the recruited members") {
        auto g = compile_source(corpus("tracking.tt"));
        const std::string cap = by_op(g, "captureImage").id;
        auto e = expand(g, {{cap, {"cam1", "cam2", "cam3", "cam4"}}});
        auto groups = simultaneity_groups(e);
        REQUIRE(groups.size() == 1);
        CHECK(groups.begin()->second.size() == 4);
        CHECK(groups.begin()->second.count(instance_id(cap, "cam3")));
        const auto* inst = e.find(instance_id(cap, "cam2"));
        REQUIRE(inst);
        CHECK(inst->multiplicity == 4);
        CHECK(inst->placement == "cam2");
        const auto& model = by_op(e, "create3DImage");
        CHECK(model.firing_rule.ports.size() == 4);
        CHECK(e.sync_deps.size() == 4);
    }

    TEST_CASE("every corpus program lowers to an acyclic graph") {
        for (const auto& path : corpus_files()) {
            auto g = compile_source(read_file(path));
            CHECK_NOTHROW(g.check());
            CHECK(g.topological_order().size() == g.nodes.size());
        }
    }
}

TEST_SUITE("firing_ready") {
    GraphNode three_token_node() {
        GraphNode n;
        n.id = "n";
        n.code_block.op = "h";
        n.firing_rule.ports = {{"d1", Port::Kind::Data, true, ""}, {"d2", Port::Kind::Data, true, ""}};
        n.firing_rule.sync = {{"self", 1000}};
        return n;
    }

    TEST_CASE("full token set") {
        auto n = three_token_node();
        TokenState s;
        s.put("d1");
        s.put("d2");
        s.put_sync("self", {0});
        CHECK(firing_ready(n, s));
    }

    TEST_CASE("exhaustive subsets: ready only for the full set") {
        auto n = three_token_node();
        int ready_count = 0;
        for (int mask = 0; mask < 8; ++mask) {
            TokenState s;
            if (mask & 1) s.put("d1");
            if (mask & 2) s.put("d2");
            if (mask & 4) s.put_sync("self", {500});
            const bool ready = firing_ready(n, s);
            CHECK(ready == (mask == 7));
            ready_count += ready;
        }
        CHECK(ready_count == 1);
    }

    TEST_CASE("sync token at a worse precision does not count") {
        auto n = three_token_node();
        TokenState s;
        s.put("d1");
        s.put("d2");
        s.put_sync("self", {10'000});
        CHECK_FALSE(firing_ready(n, s));
        s.put_sync("self", {1'000});
        CHECK(firing_ready(n, s));
    }

    TEST_CASE("expired sync tokens are not honored") {
        auto n = three_token_node();
        TokenState s;
        s.put("d1");
        s.put("d2");
        s.put_sync("self", {0, 5'000});
        CHECK(firing_ready(n, s, 5'000));
        CHECK_FALSE(firing_ready(n, s, 5'001));
    }

    TEST_CASE("monotone: adding a token never makes a ready node unready") {
        std::mt19937_64 rng(11);
        auto n = three_token_node();
        n.firing_rule.ports.push_back({"d3", Port::Kind::Guard, false, ""});
        const std::vector<std::string> ports = {"d1", "d2", "d3", "extra"};
        for (int trial = 0; trial < 500; ++trial) {
            TokenState s;
            for (const auto& p : ports)
                if (rng() % 2) s.put(p);
            if (rng() % 2) s.put_sync("self", {static_cast<Nanos>(rng() % 2000)});
            const bool before = firing_ready(n, s);
            TokenState more = s;
            const auto& p = ports[rng() % ports.size()];
            more.put(p);
            if (rng() % 3 == 0) more.put_sync("other", {0});
            if (before) CHECK(firing_ready(n, more));
        }
    }

    TEST_CASE("consume removes each data token once") {
        auto n = three_token_node();
        TokenState s;
        s.put("d1");
        s.put("d2");
        s.put_sync("self", {0});
        s.consume(n);
        CHECK_FALSE(firing_ready(n, s));
        CHECK_THROWS_AS(s.consume(n), GraphError);
    }
}

TEST_SUITE("serialize") {
    TEST_CASE("empty graph") {
        DataflowGraph g;
        const std::string text = serialize(g);
        CHECK(text == R"({"nodes":[],"data_edges":[],"sync_deps":[],"simultaneity_groups":{},"version":1})");
        CHECK(deserialize(text) == g);
    }

    TEST_CASE("round trip is the identity over the corpus") {
        const std::set<std::string> clocks = {"gps", "utc"};
        for (const auto& path : corpus_files()) {
            auto g = compile_source(read_file(path));
            const std::string text = serialize(g);
            auto back = deserialize(text, &clocks);
            CHECK_MESSAGE(back == g, path.filename().string());
            CHECK(serialize(back) == text);
        }
    }

    TEST_CASE("output is byte-stable") {
        const auto src = corpus("tracking.tt");
        CHECK(serialize(compile_source(src)) == serialize(compile_source(src)));
        // node order does not matter
        auto g = compile_source(src);
        auto shuffled = g;
        std::reverse(shuffled.nodes.begin(), shuffled.nodes.end());
        CHECK(serialize(shuffled) == serialize(g));
    }

    TEST_CASE("unknown clock is rejected") {
        auto g = compile_source(corpus("named_clock.tt"));
        const std::string text = serialize(g);
        const std::set<std::string> clocks = {"ref"};
        try {
            deserialize(text, &clocks);
            FAIL("expected DeserializeError");
        } catch (const DeserializeError& e) {
            CHECK(e.path == "/sync_deps/0/clock");
        }
    }

    TEST_CASE("schema violations") {
        CHECK_THROWS_AS(deserialize("{"), DeserializeError);
        CHECK_THROWS_AS(deserialize(R"({"nodes":[],"data_edges":[],"sync_deps":[],"simultaneity_groups":{}})"),
                        DeserializeError);
        CHECK_THROWS_AS(
            deserialize(R"({"nodes":[],"data_edges":[],"sync_deps":[],"simultaneity_groups":{},"version":1,"x":0})"),
            DeserializeError);
        CHECK_THROWS_AS(deserialize(R"({"nodes":[],"data_edges":[],"sync_deps":[],"simultaneity_groups":{},"version":2})"),
                        DeserializeError);
        // an edge to a node that does not exist
        CHECK_THROWS_AS(
            deserialize(
                R"({"nodes":[],"data_edges":[{"producer":"a","consumer":"b","port":"p","loop_back":false}],"sync_deps":[],"simultaneity_groups":{},"version":1})"),
            DeserializeError);
        // a cycle through forward edges
        auto g = compile_source(corpus("def_use.tt"));
        g.data_edges.push_back({by_op(g, "h").id, by_op(g, "f").id, "c", false});
        g.find(by_op(g, "f").id)->firing_rule.ports.push_back({"c", Port::Kind::Data, true, ""});
        CHECK_THROWS_AS(deserialize(serialize(g)), DeserializeError);
    }
}
