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

#include <cstdint>
#include <string_view>

namespace ticktalk {

/// Stable 64-bit FNV-1a hash; used to key random streams by entity name so
/// that streams do not depend on the standard library's std::hash.
std::uint64_t stable_hash(std::string_view text);

/// Counter-based random stream. Draw i is a pure function of
/// (seed, entity, i), so streams for different entities never interact and
/// any draw can be reproduced without replaying the others.
class Stream {
public:
    Stream() = default;
    Stream(std::uint64_t seed, std::string_view entity);

    std::uint64_t draw(std::uint64_t index) const;

    std::uint64_t next_u64() { return draw(counter_++); }
    /// Uniform in [0, 1).
    double uniform();
    /// Standard normal (Box-Muller, two draws per sample).
    double normal();
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace ticktalk
