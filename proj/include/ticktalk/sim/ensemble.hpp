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


#pragma once

#include <map>
#include <set>
#include <string>

#include "ticktalk/common.hpp"

namespace ticktalk::sim {

struct Position {
    double x_m = 0;
    double y_m = 0;
    friend bool operator==(const Position&, const Position&) = default;
};

struct ExecBounds {
    Nanos best_ns = 0;
    Nanos worst_ns = 0;
    friend bool operator==(const ExecBounds&, const ExecBounds&) = default;
};

struct Ensemble {
    std::string id;
    Position position;
    std::set<std::string> capabilities;
    /// A local clock id, or a reference clock id when the ensemble hosts
    /// that reference itself.
    std::string clock;
    std::string power;
    std::string link;
    std::string admin_domain;
    bool mostly_off = false;
    std::map<std::string, ExecBounds> exec_time;

    /// Throws Error when capabilities are empty or a bound has worst < best.
    void check() const;
};

}  // namespace ticktalk::sim
