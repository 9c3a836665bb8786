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

#include "ticktalk/ir/serialize.hpp"

#include <initializer_list>

#include "json.hpp"

namespace ticktalk::ir {

using Json = nlohmann::ordered_json;

DeserializeError::DeserializeError(std::string p, const std::string& message)
    : Error((p.empty() ? std::string("/") : p) + ": " + message), path(std::move(p)) {}

namespace {

const char* kind_name(NodeKind k) {
    switch (k) {
    case NodeKind::Call: return "call";
    case NodeKind::SetExpand: return "set_expand";
    case NodeKind::Break: return "break";
    }
    return "call";
}

const char* arg_kind_name(Arg::Kind k) {
    switch (k) {
    case Arg::Kind::Port: return "port";
    case Arg::Kind::Ambient: return "ambient";
    case Arg::Kind::Literal: return "literal";
    }
    return "literal";
}

Json constraint_json(const TimingConstraint& c) {
    Json j;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Frequency>) {
                j["type"] = "frequency";
                j["period_ns"] = v.period_ns;
                j["scope"] = v.scope;
            } else if constexpr (std::is_same_v<T, Synchronize>) {
                j["type"] = "synchronize";
                j["precision_ns"] = v.precision_ns;
                j["clock"] = v.clock.to_string();
                j["scope"] = v.scope;
            } else if constexpr (std::is_same_v<T, Simultaneous>) {
                j["type"] = "simultaneous";
                j["group"] = v.group_id;
            } else if constexpr (std::is_same_v<T, Latency>) {
                j["type"] = "latency";
                j["bound_ns"] = v.bound_ns;
                j["scope"] = v.scope;
            } else {
                j["type"] = "at_time";
                j["instant_ns"] = v.instant.ns;
                j["clock"] = v.clock.to_string();
            }
        },
        c);
    return j;
}

Json node_json(const GraphNode& n) {
    Json j;
    j["id"] = n.id;
    j["kind"] = kind_name(n.kind);
    j["op"] = n.code_block.op;
    j["params"] = n.code_block.params;
    Json args = Json::array();
    for (const auto& a : n.args) args.push_back(Json{{"kind", arg_kind_name(a.kind)}, {"value", a.value}});
    j["args"] = std::move(args);
    Json cs = Json::array();
    for (const auto& c : n.code_block.constraints) cs.push_back(constraint_json(c));
    j["constraints"] = std::move(cs);
    j["clock_binding"] = n.code_block.clock_binding.to_string();
    j["output"] = n.output;
    j["region"] = n.region;
    j["placement"] = n.placement ? Json(*n.placement) : Json(nullptr);
    j["multiplicity"] = n.multiplicity;
    Json ports = Json::array();
    for (const auto& p : n.firing_rule.ports) {
        Json pj;
        pj["name"] = p.name;
        pj["kind"] = p.kind == Port::Kind::Data ? "data" : "guard";
        pj["when"] = p.when;
        pj["initial"] = p.initial;
        ports.push_back(std::move(pj));
    }
    Json sync = Json::array();
    for (const auto& s : n.firing_rule.sync) sync.push_back(Json{{"clock", s.clock}, {"precision_ns", s.precision_ns}});
    j["firing_rule"] = Json{{"ports", std::move(ports)}, {"sync", std::move(sync)}};
    return j;
}

// ---- strict reader ----------------------------------------------------------

class Reader {
public:
    [[noreturn]] static void fail(const std::string& path, const std::string& msg) { throw DeserializeError(path, msg); }

    static void keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!j.is_object()) fail(path, "expected an object");
        for (const auto& [k, v] : j.items()) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || k == a;
            if (!ok) fail(path + "/" + k, "unknown key");
        }
        for (const char* a : allowed)
            if (!j.contains(a)) fail(path + "/" + a, "missing key");
    }

    static const Json& arr(const Json& j, const std::string& path) {
        if (!j.is_array()) fail(path, "expected an array");
        return j;
    }

    static std::string str(const Json& j, const std::string& path) {
        if (!j.is_string()) fail(path, "expected a string");
        return j.get<std::string>();
    }

    static Nanos integer(const Json& j, const std::string& path) {
        if (!j.is_number_integer()) fail(path, "expected an integer");
        return j.get<Nanos>();
    }

    static bool boolean(const Json& j, const std::string& path) {
        if (!j.is_boolean()) fail(path, "expected a boolean");
        return j.get<bool>();
    }

    static TimingConstraint constraint(const Json& j, const std::string& path) {
        if (!j.is_object() || !j.contains("type")) fail(path, "expected a constraint object with a type");
        const std::string type = str(j["type"], path + "/type");
        if (type == "frequency") {
            keys(j, path, {"type", "period_ns", "scope"});
            return Frequency{integer(j["period_ns"], path + "/period_ns"), str(j["scope"], path + "/scope")};
        }
        if (type == "synchronize") {
            keys(j, path, {"type", "precision_ns", "clock", "scope"});
            return Synchronize{integer(j["precision_ns"], path + "/precision_ns"),
                               ClockRef::from_string(str(j["clock"], path + "/clock")), str(j["scope"], path + "/scope")};
        }
        if (type == "simultaneous") {
            keys(j, path, {"type", "group"});
            return Simultaneous{str(j["group"], path + "/group")};
        }
        if (type == "latency") {
            keys(j, path, {"type", "bound_ns", "scope"});
            return Latency{integer(j["bound_ns"], path + "/bound_ns"), str(j["scope"], path + "/scope")};
        }
        if (type == "at_time") {
            keys(j, path, {"type", "instant_ns", "clock"});
            return AtTime{WallTime{integer(j["instant_ns"], path + "/instant_ns")},
                          ClockRef::from_string(str(j["clock"], path + "/clock"))};
        }
        fail(path + "/type", "unknown constraint type '" + type + "'");
    }

    static GraphNode node(const Json& j, const std::string& path) {
        keys(j, path,
             {"id", "kind", "op", "params", "args", "constraints", "clock_binding", "output", "region", "placement",
              "multiplicity", "firing_rule"});
        GraphNode n;
        n.id = str(j["id"], path + "/id");
        const std::string kind = str(j["kind"], path + "/kind");
        if (kind == "call") {
            n.kind = NodeKind::Call;
        } else if (kind == "set_expand") {
            n.kind = NodeKind::SetExpand;
        } else if (kind == "break") {
            n.kind = NodeKind::Break;
        } else {
            fail(path + "/kind", "unknown node kind '" + kind + "'");
        }
        n.code_block.id = n.id;
        n.code_block.op = str(j["op"], path + "/op");
        const auto& params = arr(j["params"], path + "/params");
        for (std::size_t i = 0; i < params.size(); ++i)
            n.code_block.params.push_back(str(params[i], path + "/params/" + std::to_string(i)));
        const auto& args = arr(j["args"], path + "/args");
        for (std::size_t i = 0; i < args.size(); ++i) {
            const std::string ap = path + "/args/" + std::to_string(i);
            keys(args[i], ap, {"kind", "value"});
            const std::string k = str(args[i]["kind"], ap + "/kind");
            Arg a;
            if (k == "port") {
                a.kind = Arg::Kind::Port;
            } else if (k == "ambient") {
                a.kind = Arg::Kind::Ambient;
            } else if (k == "literal") {
                a.kind = Arg::Kind::Literal;
            } else {
                fail(ap + "/kind", "unknown argument kind '" + k + "'");
            }
            a.value = str(args[i]["value"], ap + "/value");
            n.args.push_back(std::move(a));
        }
        const auto& cs = arr(j["constraints"], path + "/constraints");
        for (std::size_t i = 0; i < cs.size(); ++i)
            n.code_block.constraints.push_back(constraint(cs[i], path + "/constraints/" + std::to_string(i)));
        n.code_block.clock_binding = ClockRef::from_string(str(j["clock_binding"], path + "/clock_binding"));
        n.output = str(j["output"], path + "/output");
        n.region = str(j["region"], path + "/region");
        if (!j["placement"].is_null()) n.placement = str(j["placement"], path + "/placement");
        n.multiplicity = static_cast<int>(integer(j["multiplicity"], path + "/multiplicity"));

        const std::string fp = path + "/firing_rule";
        keys(j["firing_rule"], fp, {"ports", "sync"});
        const auto& ports = arr(j["firing_rule"]["ports"], fp + "/ports");
        for (std::size_t i = 0; i < ports.size(); ++i) {
            const std::string pp = fp + "/ports/" + std::to_string(i);
            keys(ports[i], pp, {"name", "kind", "when", "initial"});
            Port p;
            p.name = str(ports[i]["name"], pp + "/name");
            const std::string k = str(ports[i]["kind"], pp + "/kind");
            if (k != "data" && k != "guard") fail(pp + "/kind", "unknown port kind '" + k + "'");
            p.kind = k == "data" ? Port::Kind::Data : Port::Kind::Guard;
            p.when = boolean(ports[i]["when"], pp + "/when");
            p.initial = str(ports[i]["initial"], pp + "/initial");
            n.firing_rule.ports.push_back(std::move(p));
        }
        const auto& sync = arr(j["firing_rule"]["sync"], fp + "/sync");
        for (std::size_t i = 0; i < sync.size(); ++i) {
            const std::string sp = fp + "/sync/" + std::to_string(i);
            keys(sync[i], sp, {"clock", "precision_ns"});
            n.firing_rule.sync.push_back(
                {str(sync[i]["clock"], sp + "/clock"), integer(sync[i]["precision_ns"], sp + "/precision_ns")});
        }
        return n;
    }
};

}  // namespace

std::string serialize(const DataflowGraph& input) {
    DataflowGraph g = input;
    g.canonicalize();

    Json j;
    Json nodes = Json::array();
    for (const auto& n : g.nodes) nodes.push_back(node_json(n));
    j["nodes"] = std::move(nodes);
    Json edges = Json::array();
    for (const auto& e : g.data_edges)
        edges.push_back(
            Json{{"producer", e.producer}, {"consumer", e.consumer}, {"port", e.port}, {"loop_back", e.loop_back}});
    j["data_edges"] = std::move(edges);
    Json deps = Json::array();
    for (const auto& d : g.sync_deps)
        deps.push_back(Json{{"node", d.node}, {"clock", d.clock}, {"precision_ns", d.precision_ns}});
    j["sync_deps"] = std::move(deps);
    Json groups = Json::object();
    for (const auto& [id, members] : g.simultaneity_groups) groups[id] = Json(std::vector<std::string>(members.begin(), members.end()));
    j["simultaneity_groups"] = std::move(groups);
    j["version"] = kGraphFormatVersion;
    return j.dump();
}

DataflowGraph deserialize(std::string_view text, const std::set<std::string>* known_clocks) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DeserializeError("", std::string("malformed JSON: ") + e.what());
    }
    Reader::keys(j, "", {"nodes", "data_edges", "sync_deps", "simultaneity_groups", "version"});
    if (Reader::integer(j["version"], "/version") != kGraphFormatVersion)
        Reader::fail("/version", "unsupported graph format version");

    DataflowGraph g;
    const auto& nodes = Reader::arr(j["nodes"], "/nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) g.nodes.push_back(Reader::node(nodes[i], "/nodes/" + std::to_string(i)));

    const auto& edges = Reader::arr(j["data_edges"], "/data_edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string p = "/data_edges/" + std::to_string(i);
        Reader::keys(edges[i], p, {"producer", "consumer", "port", "loop_back"});
        g.data_edges.push_back({Reader::str(edges[i]["producer"], p + "/producer"),
                                Reader::str(edges[i]["consumer"], p + "/consumer"),
                                Reader::str(edges[i]["port"], p + "/port"),
                                Reader::boolean(edges[i]["loop_back"], p + "/loop_back")});
    }

    const auto& deps = Reader::arr(j["sync_deps"], "/sync_deps");
    for (std::size_t i = 0; i < deps.size(); ++i) {
        const std::string p = "/sync_deps/" + std::to_string(i);
        Reader::keys(deps[i], p, {"node", "clock", "precision_ns"});
        SyncDep d{Reader::str(deps[i]["node"], p + "/node"), Reader::str(deps[i]["clock"], p + "/clock"),
                  Reader::integer(deps[i]["precision_ns"], p + "/precision_ns")};
        if (known_clocks && d.clock != "self" && !known_clocks->count(d.clock))
            Reader::fail(p + "/clock", "unknown clock '" + d.clock + "'");
        g.sync_deps.push_back(std::move(d));
    }

    const auto& groups = j["simultaneity_groups"];
    if (!groups.is_object()) Reader::fail("/simultaneity_groups", "expected an object");
    for (const auto& [id, members] : groups.items()) {
        const std::string p = "/simultaneity_groups/" + id;
        Reader::arr(members, p);
        auto& set = g.simultaneity_groups[id];
        for (std::size_t i = 0; i < members.size(); ++i) set.insert(Reader::str(members[i], p + "/" + std::to_string(i)));
    }

    try {
        g.check(known_clocks);
    } catch (const GraphError& e) {
        throw DeserializeError("", e.what());
    }
    g.canonicalize();
    return g;
}

}  // namespace ticktalk::ir
