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

#include "ticktalk/ir/firing.hpp"

namespace ticktalk::ir {

void TokenState::consume(const GraphNode& node) {
    for (const auto& p : node.firing_rule.ports) {
        auto it = ports.find(p.name);
        if (it == ports.end() || !it->second) throw GraphError("consuming absent token '" + p.name + "' of " + node.id);
        it->second = false;
    }
}

bool firing_ready(const GraphNode& node, const TokenState& state, std::optional<Nanos> now_ns) {
    for (const auto& p : node.firing_rule.ports) {
        auto it = state.ports.find(p.name);
        if (it == state.ports.end() || !it->second) return false;
    }
    for (const auto& req : node.firing_rule.sync) {
        auto it = state.sync.find(req.clock);
        if (it == state.sync.end()) return false;
        if (it->second.achieved_ns > req.precision_ns) return false;
        if (now_ns && *now_ns > it->second.expires_at_ns) return false;
    }
    return true;
}

}  // namespace ticktalk::ir
