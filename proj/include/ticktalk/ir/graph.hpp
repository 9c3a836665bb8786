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
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ticktalk/common.hpp"

namespace ticktalk::ir {

// ---------------------------------------------------------------------------
// Timing constraints. All durations are canonical nanoseconds; scope names the
// source block (every/within/withSynchronization) that attached the constraint
// so that nodes of one block can be grouped back together.
// ---------------------------------------------------------------------------

struct Frequency {
    Nanos period_ns = 0;
    std::string scope;
    friend bool operator==(const Frequency&, const Frequency&) = default;
};

struct Synchronize {
    Nanos precision_ns = 0;
    ClockRef clock;
    std::string scope;
    friend bool operator==(const Synchronize&, const Synchronize&) = default;
};

struct Simultaneous {
    std::string group_id;
    friend bool operator==(const Simultaneous&, const Simultaneous&) = default;
};

struct Latency {
    Nanos bound_ns = 0;
    std::string scope;
    friend bool operator==(const Latency&, const Latency&) = default;
};

struct AtTime {
    WallTime instant;
    ClockRef clock;
    friend bool operator==(const AtTime&, const AtTime&) = default;
};

using TimingConstraint = std::variant<Frequency, Synchronize, Simultaneous, Latency, AtTime>;

/// Throws GraphError when a period, precision or bound is not positive.
void check_constraint(const TimingConstraint& c);

struct CodeBlock {
    std::string id;
    std::string op;
    std::vector<std::string> params;  // literal arguments, in call order
    std::vector<TimingConstraint> constraints;
    ClockRef clock_binding;

    template <class T>
    const T* find() const {
        for (const auto& c : constraints)
            if (const auto* p = std::get_if<T>(&c)) return p;
        return nullptr;
    }

    friend bool operator==(const CodeBlock&, const CodeBlock&) = default;
};

enum class NodeKind {
    Call,       // one effectful call
    SetExpand,  // simultaneously(S.m()): one instance per member of S at placement time
    Break,      // exits the enclosing loop after the current iteration
};

/// How a call argument is supplied.
struct Arg {
    enum class Kind { Port, Ambient, Literal };
    Kind kind = Kind::Literal;
    std::string value;  // port name, ambient name, or literal text
    friend bool operator==(const Arg&, const Arg&) = default;
};

struct Port {
    enum class Kind { Data, Guard };
    std::string name;
    Kind kind = Kind::Data;
    bool when = true;  // Guard: branch taken when the value's truthiness equals this
    /// Ambient name or literal that supplies the first loop iteration when the
    /// port is fed only by a loop-back edge.
    std::string initial;
    friend bool operator==(const Port&, const Port&) = default;
};

struct SyncRequirement {
    std::string clock;  // "self" or a named clock id
    Nanos precision_ns = 0;
    friend bool operator==(const SyncRequirement&, const SyncRequirement&) = default;
};

/// Tokens a node needs before it may fire: one per inbound data port plus
/// one sync token per sync dependency.
struct FiringRule {
    std::vector<Port> ports;
    std::vector<SyncRequirement> sync;
    friend bool operator==(const FiringRule&, const FiringRule&) = default;
};

struct GraphNode {
    std::string id;
    NodeKind kind = NodeKind::Call;
    CodeBlock code_block;
    std::vector<Arg> args;
    std::string output;  // variable defined by this node, empty when none
    /// Execution region: "" for straight-line code, otherwise the loop or
    /// periodic block scope, nested scopes joined with '/'.
    std::string region;
    std::optional<std::string> placement;  // ensemble id; nullopt = Unplaced
    int multiplicity = 0;                  // SetExpand: members after placement, 0 = unresolved
    FiringRule firing_rule;

    const std::string& op() const { return code_block.op; }
    const Port* find_port(const std::string& name) const;

    friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct DataEdge {
    std::string producer;
    std::string consumer;
    std::string port;
    bool loop_back = false;  // carries a value into the next loop iteration

    friend bool operator==(const DataEdge&, const DataEdge&) = default;
    friend auto operator<=>(const DataEdge&, const DataEdge&) = default;
};

struct SyncDep {
    std::string node;
    std::string clock;
    Nanos precision_ns = 0;

    friend bool operator==(const SyncDep&, const SyncDep&) = default;
    friend auto operator<=>(const SyncDep&, const SyncDep&) = default;
};

class GraphError : public Error {
public:
    using Error::Error;
};

struct DataflowGraph {
    std::vector<GraphNode> nodes;
    std::vector<DataEdge> data_edges;
    std::vector<SyncDep> sync_deps;
    std::map<std::string, std::set<std::string>> simultaneity_groups;

    const GraphNode* find(const std::string& id) const;
    GraphNode* find(const std::string& id);

    /// Producers feeding `consumer`, forward edges only.
    std::vector<const DataEdge*> inbound(const std::string& consumer) const;

    /// Sorts nodes by id and edges/deps lexicographically.
    void canonicalize();

    /// Checks every structural invariant; throws GraphError naming the first
    /// violation. When `known_clocks` is given, every sync dependency must
    /// name "self" or one of those clocks.
    void check(const std::set<std::string>* known_clocks = nullptr) const;

    /// Forward-edge topological order of node ids; throws GraphError on a cycle.
    std::vector<std::string> topological_order() const;

    friend bool operator==(const DataflowGraph&, const DataflowGraph&) = default;
};

}  // namespace ticktalk::ir
