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


#include "ticktalk/sim/ensemble.hpp"

namespace ticktalk::sim {

void Ensemble::check() const {
    if (capabilities.empty()) throw Error("ensemble " + id + " has no capabilities");
    for (const auto& [op, b] : exec_time) {
        if (b.best_ns < 0 || b.worst_ns < b.best_ns)
            throw Error("ensemble " + id + ": exec_time for " + op + " needs 0 <= best <= worst");
    }
}

}  // namespace ticktalk::sim
