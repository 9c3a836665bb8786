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

#include "ticktalk/dsl/parser.hpp"
#include "ticktalk/ir/graph.hpp"

namespace ticktalk::ir {

class LoweringError : public Error {
public:
    LoweringError(SourceSpan span, const std::string& message);
    SourceSpan span;
};

/// Decomposes a validated program into a dataflow graph.
///
/// One node per effectful call (plus one per `break`), def-use data edges,
/// loop-back edges for values carried across loop iterations, and guard
/// ports for statements under `if`. Enclosing timing blocks attach their
/// constraints to every node they contain.
DataflowGraph lower(const dsl::ValidatedAst& ast);

/// Convenience: tokenize, parse, validate, lower.
DataflowGraph compile_source(std::string_view source);

/// Returns the groups created by lower(), or after expand() the per-member
/// instance nodes.
std::map<std::string, std::set<std::string>> simultaneity_groups(const DataflowGraph& graph);

/// Instance id of a set-expansion node on one member ensemble, e.g.
/// "n001_captureImage[cam2]".
std::string instance_id(const std::string& node_id, const std::string& ensemble);

/// Re-specializes a graph for one placement: each SetExpand node becomes one
/// instance node per member in `members[node id]`, edges and groups are
/// rewritten accordingly, and the instance multiplicity is recorded.
DataflowGraph expand(const DataflowGraph& graph, const std::map<std::string, std::vector<std::string>>& members);

}  // namespace ticktalk::ir
