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


#include <random>

#include "corpus.hpp"
#include "doctest.h"
#include "ticktalk/dsl/parser.hpp"

using namespace ticktalk;
using namespace ticktalk::dsl;
using ticktalk::testing::corpus;
using ticktalk::testing::corpus_files;
using ticktalk::testing::read_file;

namespace {

std::vector<TokenKind> kinds(const std::vector<Token>& toks) {
    std::vector<TokenKind> out;
    for (const auto& t : toks) out.push_back(t.kind);
    return out;
}

bool same_lexemes(const std::vector<Token>& a, const std::vector<Token>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].same_lexeme(b[i])) return false;
    return true;
}

// Walks every statement and expression span.
struct SpanCollector {
    std::vector<SourceSpan> spans;

    void block(const Block& b) {
        for (const auto& s : b) stmt(s);
    }
    void expr(const Expr& e) {
        spans.push_back(e.span);
        if (const auto* c = std::get_if<CallExpr>(&e.node))
            for (const auto& a : c->args) expr(a);
    }
    void stmt(const Statement& s) {
        spans.push_back(s.span);
        std::visit(
            [&](const auto& st) {
                using T = std::decay_t<decltype(st)>;
                if constexpr (std::is_same_v<T, AssignStmt>) {
                    expr(st.value);
                } else if constexpr (std::is_same_v<T, IfStmt>) {
                    expr(st.cond);
                    block(st.then_body);
                    if (st.else_body) block(*st.else_body);
                } else if constexpr (std::is_same_v<T, SyncBlockStmt>) {
                    expr(st.sensor_set);
                    block(st.body);
                } else if constexpr (std::is_same_v<T, CallStmt>) {
                    for (const auto& a : st.call.args) expr(a);
                } else if constexpr (requires { st.body; }) {
                    block(st.body);
                }
            },
            s.node);
    }
};

std::vector<std::string> lines_of(const std::string& src) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : src) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    lines.push_back(cur);
    return lines;
}

}  // namespace

TEST_SUITE("tokenize") {
    TEST_CASE("withSynchronization call from the tracking program") {
        auto toks = tokenize("withSynchronization(S, 1us, self)");
        CHECK(kinds(toks) == std::vector<TokenKind>{TokenKind::WithSynchronization, TokenKind::LParen, TokenKind::Ident,
                                                    TokenKind::Comma, TokenKind::Duration, TokenKind::Comma,
                                                    TokenKind::SelfKw, TokenKind::RParen});
        CHECK(toks[2].text == "S");
        CHECK(toks[4].duration.value() == 1);
        CHECK(toks[4].duration.unit() == TimeUnit::Us);
        CHECK(toks[4].duration.ns() == 1000);
    }

    TEST_CASE("empty input") { CHECK(tokenize("").empty()); }

    TEST_CASE("wall-time literal") {
        auto toks = tokenize("@4:35PM");
        REQUIRE(toks.size() == 1);
        CHECK(toks[0].kind == TokenKind::AtTime);
        CHECK(toks[0].wall_time.ns == (16LL * 3600 + 35 * 60) * kNanosPerSecond);

        CHECK(tokenize("@16:35")[0].wall_time == toks[0].wall_time);
        CHECK(tokenize("@12:00AM")[0].wall_time.ns == 0);
        CHECK(tokenize("@12:00PM")[0].wall_time.ns == 12LL * 3600 * kNanosPerSecond);
        CHECK(tokenize("@9:05:30AM")[0].wall_time.ns == (9LL * 3600 + 5 * 60 + 30) * kNanosPerSecond);
    }

    TEST_CASE("duration literals are single tokens") {
        auto toks = tokenize("100ms 5s 250ns 7us");
        REQUIRE(toks.size() == 4);
        CHECK(toks[0].duration.ns() == 100'000'000);
        CHECK(toks[1].duration.ns() == 5'000'000'000);
        CHECK(toks[2].duration.ns() == 250);
        CHECK(toks[3].duration.ns() == 7'000);
    }

    TEST_CASE("duration up to 10^18 ns is representable") {
        CHECK(tokenize("1000000000s")[0].duration.ns() == 1'000'000'000'000'000'000);
        CHECK_THROWS_AS(tokenize("1000000001s"), LexError);
    }

    TEST_CASE("spans are 1-based line and column") {
        auto toks = tokenize("a = f();\n  loop");
        CHECK(toks[0].span == SourceSpan{1, 1, 1});
        CHECK(toks[2].span == SourceSpan{1, 5, 1});
        CHECK(toks.back().span == SourceSpan{2, 3, 4});
    }

    TEST_CASE("errors") {
        CHECK_THROWS_AS(tokenize("a # b"), LexError);
        CHECK_THROWS_AS(tokenize("10kg"), LexError);
        CHECK_THROWS_AS(tokenize("@25:00"), LexError);
        CHECK_THROWS_AS(tokenize("@4:61PM"), LexError);
        CHECK_THROWS_AS(tokenize("@13:00PM"), LexError);
        try {
            tokenize("x = 1;\n y $");
            FAIL("expected LexError");
        } catch (const LexError& e) {
            CHECK(e.span == SourceSpan{2, 4, 1});
        }
    }

    TEST_CASE("comments are skipped") {
        CHECK(tokenize("// only a comment").empty());
        CHECK(tokenize("a // trailing\nb").size() == 2);
    }

    TEST_CASE("concatenation at token boundaries commutes with tokenize") {
        std::mt19937_64 rng(7);
        for (const auto& path : corpus_files()) {
            const std::string src = read_file(path);
            const auto whole = tokenize(src);
            // Whitespace positions outside comments are token boundaries.
            std::vector<std::size_t> cuts;
            bool in_comment = false;
            for (std::size_t i = 0; i < src.size(); ++i) {
                if (!in_comment && src[i] == '/' && i + 1 < src.size() && src[i + 1] == '/') in_comment = true;
                if (src[i] == '\n') in_comment = false;
                if (!in_comment && (src[i] == ' ' || src[i] == '\n')) cuts.push_back(i);
            }
            for (int trial = 0; trial < 20 && !cuts.empty(); ++trial) {
                const std::size_t cut = cuts[rng() % cuts.size()];
                auto left = tokenize(src.substr(0, cut));
                auto right = tokenize(src.substr(cut));
                left.insert(left.end(), right.begin(), right.end());
                CHECK_MESSAGE(same_lexemes(left, whole), path.filename().string() << " cut at " << cut);
            }
        }
    }
}

TEST_SUITE("parse") {
    TEST_CASE("tracking program structure") {
        auto ast = parse_source(corpus("tracking.tt"));
        REQUIRE(ast.statements.size() == 1);
        const auto* loop = std::get_if<LoopStmt>(&ast.statements[0].node);
        REQUIRE(loop);
        const SyncBlockStmt* sync = nullptr;
        for (const auto& s : loop->body)
            if (const auto* sb = std::get_if<SyncBlockStmt>(&s.node)) sync = sb;
        REQUIRE(sync);
        CHECK(sync->precision.ns() == 1000);
        CHECK(sync->clock == ClockRef::self());
        REQUIRE(sync->body.size() == 1);
        const auto& assign = std::get<AssignStmt>(sync->body[0].node);
        const auto& sim = std::get<SimultaneousExpr>(assign.value.node);
        CHECK(sim.set == "S");
        CHECK(sim.method == "captureImage");
    }

    TEST_CASE("minimal loop") {
        auto ast = parse_source("loop { break; }");
        REQUIRE(ast.statements.size() == 1);
        const auto& loop = std::get<LoopStmt>(ast.statements[0].node);
        REQUIRE(loop.body.size() == 1);
        CHECK(std::holds_alternative<BreakStmt>(loop.body[0].node));
    }

    TEST_CASE("every block") {
        auto ast = parse_source("every(100ms) { x = poll(); }");
        REQUIRE(ast.statements.size() == 1);
        const auto& ev = std::get<EveryBlockStmt>(ast.statements[0].node);
        CHECK(ev.period.ns() == 100 * kNanosPerMilli);
        REQUIRE(ev.body.size() == 1);
        const auto& a = std::get<AssignStmt>(ev.body[0].node);
        CHECK(a.target == "x");
        CHECK(std::get<CallExpr>(a.value.node).name == "poll");
    }

    TEST_CASE("at block with named clock") {
        auto ast = parse_source("at(@11:00AM, utc) { reading = poll(); }");
        const auto& at = std::get<AtBlockStmt>(ast.statements[0].node);
        CHECK(at.instant.ns == 11LL * 3600 * kNanosPerSecond);
        CHECK(at.clock == ClockRef::named("utc"));
    }

    TEST_CASE("errors carry expected and found") {
        try {
            parse_source("loop { break }");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.expected == "';'");
            CHECK(e.found == "'}'");
            CHECK(e.span == SourceSpan{1, 14, 1});
        }
        CHECK_THROWS_AS(parse_source("x = ;"), ParseError);
        CHECK_THROWS_AS(parse_source("withSynchronization(S, 1, self) {}"), ParseError);
        CHECK_THROWS_AS(parse_source("loop {"), ParseError);
        CHECK_THROWS_AS(parse_source("x;"), ParseError);
        CHECK_THROWS_AS(parse_source("a = simultaneously(S.m);"), ParseError);
    }

    TEST_CASE("pretty-print round trip over the corpus") {
        const auto files = corpus_files();
        CHECK(files.size() >= 12);
        for (const auto& path : files) {
            const auto ast = parse_source(read_file(path));
            const std::string printed = pretty_print(ast);
            const auto again = parse_source(printed);
            CHECK_MESSAGE(structurally_equal(ast, again), path.filename().string());
            CHECK(pretty_print(again) == printed);
        }
    }

    TEST_CASE("every span lies within the source text") {
        for (const auto& path : corpus_files()) {
            const std::string src = read_file(path);
            const auto lines = lines_of(src);
            SpanCollector c;
            c.block(parse_source(src).statements);
            for (const auto& s : c.spans) {
                REQUIRE(s.line >= 1);
                REQUIRE(s.line <= static_cast<int>(lines.size()));
                CHECK(s.column >= 1);
                CHECK(s.length >= 1);
                CHECK_MESSAGE(s.column - 1 + s.length <= static_cast<int>(lines[s.line - 1].size()),
                              path.filename().string() << " line " << s.line);
            }
        }
    }
}

TEST_SUITE("validate") {
    TEST_CASE("tracking program is valid") {
        auto diags = check(parse_source(corpus("tracking.tt")));
        CHECK(diags.empty());
        CHECK_NOTHROW(validate(parse_source(corpus("tracking.tt"))));
    }

    TEST_CASE("whole corpus validates") {
        for (const auto& path : corpus_files())
            CHECK_MESSAGE(check(parse_source(read_file(path))).empty(), path.filename().string());
    }

    TEST_CASE("simultaneously at top level") {
        auto diags = check(parse_source("S = getSensors(x, y, 100);\na = simultaneously(S.captureImage());"));
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].code == DiagCode::SimultaneousOutsideSync);
        CHECK(diags[0].span.line == 2);
    }

    TEST_CASE("zero precision") {
        auto diags = check(parse_source("S = getSensors(x, y, 1);\nwithSynchronization(S, 0ns, self){}"));
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].code == DiagCode::NonPositivePrecision);
    }

    TEST_CASE("zero period and bound") {
        auto diags = check(parse_source("every(0ms) {} within(0s) {}"));
        REQUIRE(diags.size() == 2);
        CHECK(diags[0].code == DiagCode::NonPositivePeriod);
        CHECK(diags[1].code == DiagCode::NonPositiveBound);
    }

    TEST_CASE("names bound before use") {
        auto diags = check(parse_source("a = f(b);\nb = g();"));
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].code == DiagCode::UnboundName);
        CHECK(check(parse_source("a = f(x, y, t);")).empty());
        // bound in only one branch
        auto branch = check(parse_source("v = poll(); if (v) { w = f(); } g(w);"));
        REQUIRE(branch.size() == 1);
        CHECK(branch[0].code == DiagCode::UnboundName);
        CHECK(check(parse_source("v = poll(); if (v) { w = f(); } else { w = g(); } h(w);")).empty());
    }

    TEST_CASE("break outside loop") {
        auto diags = check(parse_source("break;"));
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].code == DiagCode::BreakOutsideLoop);
    }

    TEST_CASE("validate throws with all diagnostics") {
        try {
            validate(parse_source("a = simultaneously(S.m()); every(0s) {}"));
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.diagnostics.size() == 3);  // outside sync, unbound S, zero period
        }
    }
}
