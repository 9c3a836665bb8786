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

#include <limits>
#include <map>
#include <optional>
#include <string>

#include "ticktalk/ir/graph.hpp"

namespace ticktalk::ir {

/// Evidence that a clock is within `achieved_ns` of its reference until
/// `expires_at_ns` (true time).
struct SyncToken {
    Nanos achieved_ns = 0;
    Nanos expires_at_ns = std::numeric_limits<Nanos>::max();
};

/// Token presence for one node instance in one iteration.
struct TokenState {
    std::map<std::string, bool> ports;        // port -> present
    std::map<std::string, SyncToken> sync;    // clock id -> token (absent = no entry)

    void put(const std::string& port) { ports[port] = true; }
    void put_sync(const std::string& clock, SyncToken t) { sync[clock] = t; }

    /// Removes the data tokens of `node`; each token is consumed exactly once.
    /// Sync tokens stay, they expire on their own.
    void consume(const GraphNode& node);
};

/// True iff every data and guard port holds a token and every sync
/// requirement is met by a token whose achieved precision is no worse than
/// required. With `now_ns`, tokens that expired before `now_ns` do not count.
bool firing_ready(const GraphNode& node, const TokenState& state, std::optional<Nanos> now_ns = std::nullopt);

}  // namespace ticktalk::ir
