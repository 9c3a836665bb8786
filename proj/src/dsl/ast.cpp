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

#include "ticktalk/dsl/ast.hpp"

#include <sstream>

namespace ticktalk::dsl {

const std::vector<std::string>& ambient_names() {
    static const std::vector<std::string> names = {"x", "y", "t"};
    return names;
}

const std::vector<std::string>& builtin_ops() {
    static const std::vector<std::string> ops = {"getSensors", "captureImage", "create3DImage",
                                                 "addImage", "predictNextPosition", "poll"};
    return ops;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool eq(const Expr& a, const Expr& b);
bool eq(const Block& a, const Block& b);

bool eq(const std::vector<Expr>& a, const std::vector<Expr>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!eq(a[i], b[i])) return false;
    return true;
}

bool eq(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        overloaded{
            [&](const IdentExpr& x) { return x.name == std::get<IdentExpr>(b.node).name; },
            [&](const IntLiteral& x) { return x.value == std::get<IntLiteral>(b.node).value; },
            [&](const CallExpr& x) {
                const auto& y = std::get<CallExpr>(b.node);
                return x.name == y.name && eq(x.args, y.args);
            },
            [&](const SimultaneousExpr& x) {
                const auto& y = std::get<SimultaneousExpr>(b.node);
                return x.set == y.set && x.method == y.method;
            },
        },
        a.node);
}

bool eq(const Statement& a, const Statement& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        overloaded{
            [&](const AssignStmt& x) {
                const auto& y = std::get<AssignStmt>(b.node);
                return x.target == y.target && eq(x.value, y.value);
            },
            [&](const LoopStmt& x) { return eq(x.body, std::get<LoopStmt>(b.node).body); },
            [&](const IfStmt& x) {
                const auto& y = std::get<IfStmt>(b.node);
                if (!eq(x.cond, y.cond) || !eq(x.then_body, y.then_body)) return false;
                if (x.else_body.has_value() != y.else_body.has_value()) return false;
                return !x.else_body || eq(*x.else_body, *y.else_body);
            },
            [&](const BreakStmt&) { return true; },
            [&](const SyncBlockStmt& x) {
                const auto& y = std::get<SyncBlockStmt>(b.node);
                return eq(x.sensor_set, y.sensor_set) && x.precision == y.precision && x.clock == y.clock &&
                       eq(x.body, y.body);
            },
            [&](const EveryBlockStmt& x) {
                const auto& y = std::get<EveryBlockStmt>(b.node);
                return x.period == y.period && eq(x.body, y.body);
            },
            [&](const WithinBlockStmt& x) {
                const auto& y = std::get<WithinBlockStmt>(b.node);
                return x.bound == y.bound && eq(x.body, y.body);
            },
            [&](const AtBlockStmt& x) {
                const auto& y = std::get<AtBlockStmt>(b.node);
                return x.instant == y.instant && x.clock == y.clock && eq(x.body, y.body);
            },
            [&](const CallStmt& x) {
                const auto& y = std::get<CallStmt>(b.node);
                return x.call.name == y.call.name && eq(x.call.args, y.call.args);
            },
        },
        a.node);
}

bool eq(const Block& a, const Block& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!eq(a[i], b[i])) return false;
    return true;
}

class Printer {
public:
    std::string run(const Ast& ast) {
        for (const auto& s : ast.statements) stmt(s);
        return out_.str();
    }

private:
    void indent() {
        for (int i = 0; i < depth_; ++i) out_ << "    ";
    }

    void block(const Block& body) {
        out_ << "{\n";
        ++depth_;
        for (const auto& s : body) stmt(s);
        --depth_;
        indent();
        out_ << "}";
    }

    void expr(const Expr& e) {
        std::visit(overloaded{
                       [&](const IdentExpr& x) { out_ << x.name; },
                       [&](const IntLiteral& x) { out_ << x.value; },
                       [&](const CallExpr& x) { call(x); },
                       [&](const SimultaneousExpr& x) {
                           out_ << "simultaneously(" << x.set << "." << x.method << "())";
                       },
                   },
                   e.node);
    }

    void call(const CallExpr& c) {
        out_ << c.name << "(";
        for (std::size_t i = 0; i < c.args.size(); ++i) {
            if (i) out_ << ", ";
            expr(c.args[i]);
        }
        out_ << ")";
    }

    void stmt(const Statement& s) {
        indent();
        std::visit(overloaded{
                       [&](const AssignStmt& x) {
                           out_ << x.target << " = ";
                           expr(x.value);
                           out_ << ";";
                       },
                       [&](const LoopStmt& x) {
                           out_ << "loop ";
                           block(x.body);
                       },
                       [&](const IfStmt& x) {
                           out_ << "if (";
                           expr(x.cond);
                           out_ << ") ";
                           block(x.then_body);
                           if (x.else_body) {
                               out_ << " else ";
                               block(*x.else_body);
                           }
                       },
                       [&](const BreakStmt&) { out_ << "break;"; },
                       [&](const SyncBlockStmt& x) {
                           out_ << "withSynchronization(";
                           expr(x.sensor_set);
                           out_ << ", " << x.precision.to_string() << ", " << x.clock.to_string() << ") ";
                           block(x.body);
                       },
                       [&](const EveryBlockStmt& x) {
                           out_ << "every(" << x.period.to_string() << ") ";
                           block(x.body);
                       },
                       [&](const WithinBlockStmt& x) {
                           out_ << "within(" << x.bound.to_string() << ") ";
                           block(x.body);
                       },
                       [&](const AtBlockStmt& x) {
                           out_ << "at(" << x.instant.to_string() << ", " << x.clock.to_string() << ") ";
                           block(x.body);
                       },
                       [&](const CallStmt& x) {
                           call(x.call);
                           out_ << ";";
                       },
                   },
                   s.node);
        out_ << "\n";
    }

    std::ostringstream out_;
    int depth_ = 0;
};

}  // namespace

bool structurally_equal(const Ast& a, const Ast& b) { return eq(a.statements, b.statements); }

std::string pretty_print(const Ast& ast) { return Printer().run(ast); }

}  // namespace ticktalk::dsl
