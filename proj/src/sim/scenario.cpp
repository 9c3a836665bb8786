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


#include "ticktalk/sim/scenario.hpp"

namespace ticktalk::sim {

void Scenario::check() const {
    if (version != 1) throw ScenarioError("unsupported scenario version " + std::to_string(version));
    try {
        registry.check();
    } catch (const rtm::RegistryError& e) {
        throw ScenarioError(e.what());
    } catch (const Error& e) {
        throw ScenarioError(e.what());
    }
    if (!registry.reference_clocks.count(self_clock))
        throw ScenarioError("self_clock " + self_clock + " is not a reference clock");
    for (std::size_t i = 1; i < trajectory.size(); ++i)
        if (trajectory[i].t_ns <= trajectory[i - 1].t_ns)
            throw ScenarioError("trajectory timestamps must be strictly increasing");
    for (const auto& [name, op] : ops)
        if (op.exec.best_ns < 0 || op.exec.worst_ns < op.exec.best_ns)
            throw ScenarioError("op " + name + ": exec_time needs 0 <= best <= worst");
    if (defaults.max_rounds < 1) throw ScenarioError("max_rounds must be at least 1");
    if (!(defaults.alpha > 0 && defaults.alpha <= 1)) throw ScenarioError("alpha must be in (0, 1]");
    if (defaults.grid_divisions < 1) throw ScenarioError("grid_divisions must be at least 1");
    if (!(defaults.high_precision_factor >= 1)) throw ScenarioError("high_precision_factor must be at least 1");
    if (!(defaults.sync_z > 0)) throw ScenarioError("sync_z must be positive");
}

Position Scenario::target_position(Nanos t) const {
    if (trajectory.empty()) return {};
    if (t <= trajectory.front().t_ns) return trajectory.front().position;
    if (t >= trajectory.back().t_ns) return trajectory.back().position;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        const auto& a = trajectory[i - 1];
        const auto& b = trajectory[i];
        if (t < b.t_ns) {
            const double f = static_cast<double>(t - a.t_ns) / static_cast<double>(b.t_ns - a.t_ns);
            return {a.position.x_m + f * (b.position.x_m - a.position.x_m),
                    a.position.y_m + f * (b.position.y_m - a.position.y_m)};
        }
    }
    return trajectory.back().position;
}

bool Scenario::target_stationary(Nanos t) const {
    if (trajectory.size() < 2 || t < trajectory.front().t_ns || t >= trajectory.back().t_ns) return true;
    for (std::size_t i = 1; i < trajectory.size(); ++i)
        if (t < trajectory[i].t_ns) return trajectory[i].position == trajectory[i - 1].position;
    return true;
}

ExecBounds Scenario::exec_bounds(const std::string& ensemble, const std::string& op) const {
    if (auto e = registry.ensembles.find(ensemble); e != registry.ensembles.end())
        if (auto it = e->second.exec_time.find(op); it != e->second.exec_time.end()) return it->second;
    if (auto it = ops.find(op); it != ops.end()) return it->second.exec;
    return {};
}

Truthiness Scenario::truthiness(const std::string& op) const {
    if (auto it = ops.find(op); it != ops.end()) return it->second.truthy;
    if (op == "predictNextPosition") return Truthiness::TargetStationary;
    return Truthiness::Always;
}

}  // namespace ticktalk::sim
