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

#include "ticktalk/ir/graph.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

namespace ticktalk::ir {

void check_constraint(const TimingConstraint& c) {
    if (const auto* f = std::get_if<Frequency>(&c); f && f->period_ns <= 0)
        throw GraphError("frequency period must be positive");
    if (const auto* s = std::get_if<Synchronize>(&c); s && s->precision_ns <= 0)
        throw GraphError("synchronization precision must be positive");
    if (const auto* l = std::get_if<Latency>(&c); l && l->bound_ns <= 0)
        throw GraphError("latency bound must be positive");
    if (const auto* a = std::get_if<AtTime>(&c); a && a->instant.ns < 0)
        throw GraphError("at-time instant must be non-negative");
    if (const auto* g = std::get_if<Simultaneous>(&c); g && g->group_id.empty())
        throw GraphError("simultaneity group id must be nonempty");
}

const Port* GraphNode::find_port(const std::string& name) const {
    for (const auto& p : firing_rule.ports)
        if (p.name == name) return &p;
    return nullptr;
}

const GraphNode* DataflowGraph::find(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

GraphNode* DataflowGraph::find(const std::string& id) {
    for (auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

std::vector<const DataEdge*> DataflowGraph::inbound(const std::string& consumer) const {
    std::vector<const DataEdge*> out;
    for (const auto& e : data_edges)
        if (e.consumer == consumer && !e.loop_back) out.push_back(&e);
    return out;
}

void DataflowGraph::canonicalize() {
    std::sort(nodes.begin(), nodes.end(), [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
    std::sort(data_edges.begin(), data_edges.end());
    std::sort(sync_deps.begin(), sync_deps.end());
}

std::vector<std::string> DataflowGraph::topological_order() const {
    std::map<std::string, int> indegree;
    std::map<std::string, std::vector<std::string>> succ;
    for (const auto& n : nodes) indegree[n.id] = 0;
    for (const auto& e : data_edges) {
        if (e.loop_back) continue;
        succ[e.producer].push_back(e.consumer);
        ++indegree[e.consumer];
    }
    std::deque<std::string> ready;
    for (const auto& [id, d] : indegree)
        if (d == 0) ready.push_back(id);
    std::vector<std::string> order;
    while (!ready.empty()) {
        auto id = ready.front();
        ready.pop_front();
        order.push_back(id);
        for (const auto& s : succ[id])
            if (--indegree[s] == 0) ready.push_back(s);
    }
    if (order.size() != indegree.size()) throw GraphError("data edges (excluding loop-back edges) contain a cycle");
    return order;
}

void DataflowGraph::check(const std::set<std::string>* known_clocks) const {
    std::set<std::string> ids;
    for (const auto& n : nodes) {
        if (n.id.empty()) throw GraphError("node with empty id");
        if (!ids.insert(n.id).second) throw GraphError("duplicate node id '" + n.id + "'");
        if (n.code_block.op.empty()) throw GraphError("node '" + n.id + "' has no operation");
        for (const auto& c : n.code_block.constraints) check_constraint(c);
        std::set<std::string> port_names;
        for (const auto& p : n.firing_rule.ports)
            if (!port_names.insert(p.name).second)
                throw GraphError("node '" + n.id + "' lists port '" + p.name + "' more than once");
        if (n.multiplicity < 0) throw GraphError("node '" + n.id + "' has negative multiplicity");
        if (n.kind != NodeKind::SetExpand && n.multiplicity != 0)
            throw GraphError("node '" + n.id + "' has a multiplicity but is not a set expansion");
    }

    // Every port is fed by at most one forward and one loop-back edge, and by at
    // least one of them.
    std::map<std::pair<std::string, std::string>, std::pair<int, int>> feeds;
    for (const auto& e : data_edges) {
        if (!ids.count(e.producer)) throw GraphError("edge from unknown node '" + e.producer + "'");
        const GraphNode* consumer = find(e.consumer);
        if (!consumer) throw GraphError("edge to unknown node '" + e.consumer + "'");
        if (!consumer->find_port(e.port))
            throw GraphError("edge into node '" + e.consumer + "' targets undeclared port '" + e.port + "'");
        auto& f = feeds[{e.consumer, e.port}];
        (e.loop_back ? f.second : f.first) += 1;
        if (f.first > 1 || f.second > 1)
            throw GraphError("port '" + e.port + "' of node '" + e.consumer + "' has more than one producer");
    }
    for (const auto& n : nodes) {
        for (const auto& p : n.firing_rule.ports) {
            auto it = feeds.find({n.id, p.name});
            if (it == feeds.end())
                throw GraphError("port '" + p.name + "' of node '" + n.id + "' has no inbound edge");
            if (it->second.first == 0 && p.initial.empty())
                throw GraphError("loop-back port '" + p.name + "' of node '" + n.id + "' has no initial value");
        }
    }

    std::map<std::string, std::vector<SyncRequirement>> deps_by_node;
    for (const auto& d : sync_deps) {
        if (!ids.count(d.node)) throw GraphError("sync dependency on unknown node '" + d.node + "'");
        if (d.precision_ns <= 0) throw GraphError("sync dependency of '" + d.node + "' has non-positive precision");
        if (known_clocks && d.clock != "self" && !known_clocks->count(d.clock))
            throw GraphError("sync dependency of '" + d.node + "' names unknown clock '" + d.clock + "'");
        deps_by_node[d.node].push_back({d.clock, d.precision_ns});
    }
    for (const auto& n : nodes) {
        auto expected = deps_by_node[n.id];
        auto actual = n.firing_rule.sync;
        auto less = [](const SyncRequirement& a, const SyncRequirement& b) {
            return std::tie(a.clock, a.precision_ns) < std::tie(b.clock, b.precision_ns);
        };
        std::sort(expected.begin(), expected.end(), less);
        std::sort(actual.begin(), actual.end(), less);
        if (expected != actual)
            throw GraphError("firing rule of '" + n.id + "' does not list exactly one sync token per sync dependency");
    }

    for (const auto& [group, members] : simultaneity_groups) {
        if (members.empty()) throw GraphError("simultaneity group '" + group + "' is empty");
        for (const auto& m : members) {
            if (!ids.count(m)) throw GraphError("simultaneity group '" + group + "' names unknown node '" + m + "'");
            if (deps_by_node[m].empty())
                throw GraphError("member '" + m + "' of simultaneity group '" + group + "' has no sync dependency");
        }
    }

    topological_order();
}

}  // namespace ticktalk::ir
