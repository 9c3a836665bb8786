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

#include <set>
#include <string>
#include <string_view>

#include "ticktalk/ir/graph.hpp"

namespace ticktalk::ir {

inline constexpr int kGraphFormatVersion = 1;

class DeserializeError : public Error {
public:
    DeserializeError(std::string path, const std::string& message);
    std::string path;  // JSON pointer to the offending value
};

/// Canonical single-line JSON (.ttg). Nodes are sorted by id so equal graphs
/// serialize to identical bytes.
std::string serialize(const DataflowGraph& graph);

/// Parses and checks a .ttg document. When `known_clocks` is non-null, every
/// sync dependency must name "self" or one of them.
DataflowGraph deserialize(std::string_view text, const std::set<std::string>* known_clocks = nullptr);

}  // namespace ticktalk::ir
