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

#include "ticktalk/rtm/rtm.hpp"

namespace ticktalk::rtm {

std::vector<std::string> get_sensors(const Registry& registry, sim::Position center, double radius_m,
                                     const std::string& capability) {
    if (!(radius_m > 0)) throw Error("get_sensors radius must be positive");
    std::vector<std::string> out;
    const double r2 = radius_m * radius_m;
    for (const auto& [id, e] : registry.ensembles) {  // map order is id order
        const double dx = e.position.x_m - center.x_m;
        const double dy = e.position.y_m - center.y_m;
        if (dx * dx + dy * dy <= r2 && (capability.empty() || e.capabilities.count(capability))) out.push_back(id);
    }
    return out;
}

Recruitment re_recruit(const std::vector<std::string>& previous, sim::Position center, double radius_m,
                       const Registry& registry, const std::string& capability) {
    auto now = get_sensors(registry, center, radius_m, capability);
    auto prev = previous;
    std::sort(prev.begin(), prev.end());
    Recruitment r;
    std::set_difference(now.begin(), now.end(), prev.begin(), prev.end(), std::back_inserter(r.joined));
    std::set_difference(prev.begin(), prev.end(), now.begin(), now.end(), std::back_inserter(r.departed));
    std::set_intersection(prev.begin(), prev.end(), now.begin(), now.end(), std::back_inserter(r.retained));
    return r;
}

NoFeasiblePlacement::NoFeasiblePlacement(std::string n, const std::string& reason)
    : Error("no feasible placement for " + n + ": " + reason), node(std::move(n)) {}

namespace {

std::vector<std::string> capable(const Registry& registry, const std::string& op) {
    std::vector<std::string> out;
    for (const auto& [id, e] : registry.ensembles)
        if (e.capabilities.count(op)) out.push_back(id);
    return out;
}

std::string preferred(const Registry& registry, const std::vector<std::string>& ids) {
    if (registry.leader && std::find(ids.begin(), ids.end(), *registry.leader) != ids.end()) return *registry.leader;
    return ids.front();
}

}  // namespace

Placement place(const ir::DataflowGraph& graph, const Registry& registry) {
    if (registry.ensembles.empty()) {
        if (graph.nodes.empty()) return {};
        throw NoFeasiblePlacement(graph.nodes.front().id, "the registry has no ensembles");
    }
    Placement p;
    for (const auto& id : graph.topological_order()) {
        const auto& node = *graph.find(id);
        const auto producer_of = [&](ir::Port::Kind kind) -> std::optional<std::string> {
            for (const auto* e : graph.inbound(id)) {
                const auto* port = node.find_port(e->port);
                if (port && port->kind == kind) return p.assigned.at(e->producer);
            }
            return std::nullopt;
        };
        if (node.placement) {
            const auto it = registry.ensembles.find(*node.placement);
            if (it == registry.ensembles.end() ||
                (node.kind != ir::NodeKind::Break && !it->second.capabilities.count(node.op())))
                throw NoFeasiblePlacement(id, "pinned ensemble " + *node.placement + " cannot run " + node.op());
            p.assigned[id] = *node.placement;
            continue;
        }
        switch (node.kind) {
        case ir::NodeKind::Break: {
            auto host = producer_of(ir::Port::Kind::Guard);
            p.assigned[id] = host ? *host : (registry.leader ? *registry.leader : registry.ensembles.begin()->first);
            break;
        }
        case ir::NodeKind::SetExpand: {
            auto members = capable(registry, node.op());
            if (members.empty()) throw NoFeasiblePlacement(id, "no ensemble offers capability '" + node.op() + "'");
            auto coordinator = producer_of(ir::Port::Kind::Data);
            p.assigned[id] = coordinator ? *coordinator : (registry.leader ? *registry.leader : members.front());
            p.candidates[id] = std::move(members);
            break;
        }
        case ir::NodeKind::Call: {
            auto hosts = capable(registry, node.op());
            if (hosts.empty()) throw NoFeasiblePlacement(id, "no ensemble offers capability '" + node.op() + "'");
            p.assigned[id] = preferred(registry, hosts);
            break;
        }
        }
    }
    return p;
}

}  // namespace ticktalk::rtm
