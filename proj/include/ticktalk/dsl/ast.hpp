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
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ticktalk/common.hpp"

namespace ticktalk::dsl {

struct Expr;

struct IdentExpr {
    std::string name;
};

struct IntLiteral {
    std::uint64_t value = 0;
};

struct CallExpr {
    std::string name;
    std::vector<Expr> args;
};

/// `simultaneously(set.method())`
struct SimultaneousExpr {
    std::string set;
    std::string method;
};

struct Expr {
    std::variant<IdentExpr, IntLiteral, CallExpr, SimultaneousExpr> node;
    SourceSpan span;
};

struct Statement;
using Block = std::vector<Statement>;

struct AssignStmt {
    std::string target;
    Expr value;
};

struct LoopStmt {
    Block body;
};

struct IfStmt {
    Expr cond;
    Block then_body;
    std::optional<Block> else_body;
};

struct BreakStmt {};

struct SyncBlockStmt {
    Expr sensor_set;
    Duration precision;
    ClockRef clock;
    Block body;
};

struct EveryBlockStmt {
    Duration period;
    Block body;
};

struct WithinBlockStmt {
    Duration bound;
    Block body;
};

struct AtBlockStmt {
    WallTime instant;
    ClockRef clock;
    Block body;
};

struct CallStmt {
    CallExpr call;
};

struct Statement {
    std::variant<AssignStmt, LoopStmt, IfStmt, BreakStmt, SyncBlockStmt, EveryBlockStmt,
                 WithinBlockStmt, AtBlockStmt, CallStmt>
        node;
    SourceSpan span;
};

struct Ast {
    Block statements;
};

/// Structural equality: same tree shape and payloads, spans ignored.
bool structurally_equal(const Ast& a, const Ast& b);

/// Canonical source rendering; re-parses to a structurally equal Ast.
std::string pretty_print(const Ast& ast);

/// Names that the runtime binds before the program starts: the tracked
/// target's position `x`, `y` and the current scenario time `t`.
const std::vector<std::string>& ambient_names();

/// Built-in operations that every scenario understands.
const std::vector<std::string>& builtin_ops();

}  // namespace ticktalk::dsl
