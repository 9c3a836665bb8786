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

#include <set>

#include "ticktalk/dsl/parser.hpp"

namespace ticktalk::dsl {

std::string_view diag_code_name(DiagCode code) {
    switch (code) {
    case DiagCode::NonPositivePrecision: return "NonPositivePrecision";
    case DiagCode::NonPositivePeriod: return "NonPositivePeriod";
    case DiagCode::NonPositiveBound: return "NonPositiveBound";
    case DiagCode::NegativeInstant: return "NegativeInstant";
    case DiagCode::SimultaneousOutsideSync: return "SimultaneousOutsideSync";
    case DiagCode::UnboundName: return "UnboundName";
    case DiagCode::BreakOutsideLoop: return "BreakOutsideLoop";
    }
    return "?";
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diags) {
    std::string msg = std::to_string(diags.size()) + " diagnostic(s)";
    for (const auto& d : diags) {
        msg += "\n  " + std::to_string(d.span.line) + ":" + std::to_string(d.span.column) + ": " +
               std::string(diag_code_name(d.code)) + ": " + d.message;
    }
    return msg;
}

class Checker {
public:
    std::vector<Diagnostic> run(const Ast& ast) {
        std::set<std::string> env(ambient_names().begin(), ambient_names().end());
        block(ast.statements, env);
        return std::move(diags_);
    }

private:
    void report(DiagCode code, SourceSpan span, std::string msg) {
        diags_.push_back({code, span, std::move(msg)});
    }

    void use(const std::string& name, SourceSpan span, const std::set<std::string>& env) {
        if (!env.count(name)) report(DiagCode::UnboundName, span, "'" + name + "' is used before it is assigned");
    }

    void expr(const Expr& e, const std::set<std::string>& env) {
        if (const auto* id = std::get_if<IdentExpr>(&e.node)) {
            use(id->name, e.span, env);
        } else if (const auto* c = std::get_if<CallExpr>(&e.node)) {
            for (const auto& a : c->args) expr(a, env);
        } else if (const auto* s = std::get_if<SimultaneousExpr>(&e.node)) {
            if (sync_depth_ == 0) {
                report(DiagCode::SimultaneousOutsideSync, e.span,
                       "simultaneously(...) must appear inside a withSynchronization block");
            }
            use(s->set, e.span, env);
        }
    }

    void block(const Block& body, std::set<std::string>& env) {
        for (const auto& s : body) stmt(s, env);
    }

    void positive(const Duration& d, DiagCode code, SourceSpan span, const char* what) {
        if (d.ns() <= 0) report(code, span, std::string(what) + " must be greater than zero, got " + d.to_string());
    }

    void stmt(const Statement& s, std::set<std::string>& env) {
        if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
            expr(a->value, env);
            env.insert(a->target);
        } else if (const auto* l = std::get_if<LoopStmt>(&s.node)) {
            ++loop_depth_;
            block(l->body, env);
            --loop_depth_;
        } else if (const auto* i = std::get_if<IfStmt>(&s.node)) {
            expr(i->cond, env);
            auto then_env = env;
            block(i->then_body, then_env);
            if (i->else_body) {
                auto else_env = env;
                block(*i->else_body, else_env);
                for (const auto& n : then_env)
                    if (else_env.count(n)) env.insert(n);
            }
        } else if (std::holds_alternative<BreakStmt>(s.node)) {
            if (loop_depth_ == 0) report(DiagCode::BreakOutsideLoop, s.span, "'break' outside of a loop");
        } else if (const auto* sb = std::get_if<SyncBlockStmt>(&s.node)) {
            expr(sb->sensor_set, env);
            positive(sb->precision, DiagCode::NonPositivePrecision, s.span, "synchronization precision");
            ++sync_depth_;
            block(sb->body, env);
            --sync_depth_;
        } else if (const auto* e = std::get_if<EveryBlockStmt>(&s.node)) {
            positive(e->period, DiagCode::NonPositivePeriod, s.span, "period");
            block(e->body, env);
        } else if (const auto* w = std::get_if<WithinBlockStmt>(&s.node)) {
            positive(w->bound, DiagCode::NonPositiveBound, s.span, "latency bound");
            block(w->body, env);
        } else if (const auto* at = std::get_if<AtBlockStmt>(&s.node)) {
            if (at->instant.ns < 0) report(DiagCode::NegativeInstant, s.span, "instant is before the scenario epoch");
            block(at->body, env);
        } else if (const auto* c = std::get_if<CallStmt>(&s.node)) {
            for (const auto& a : c->call.args) expr(a, env);
        }
    }

    std::vector<Diagnostic> diags_;
    int sync_depth_ = 0;
    int loop_depth_ = 0;
};

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> d) : Error(summarize(d)), diagnostics(std::move(d)) {}

std::vector<Diagnostic> check(const Ast& ast) { return Checker().run(ast); }

ValidatedAst validate(Ast ast) {
    auto diags = check(ast);
    if (!diags.empty()) throw ValidationError(std::move(diags));
    return ValidatedAst(std::move(ast));
}

}  // namespace ticktalk::dsl
