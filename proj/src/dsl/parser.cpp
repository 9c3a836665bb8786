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

#include "ticktalk/dsl/parser.hpp"

namespace ticktalk::dsl {

ParseError::ParseError(SourceSpan s, std::string exp, std::string fnd)
    : Error(std::to_string(s.line) + ":" + std::to_string(s.column) + ": expected " + exp + ", found " + fnd),
      span(s),
      expected(std::move(exp)),
      found(std::move(fnd)) {}

namespace {

SourceSpan merge(const SourceSpan& first, const SourceSpan& last) {
    if (first.line != last.line) return first;
    return {first.line, first.column, last.column + last.length - first.column};
}

class Parser {
public:
    explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {
        // Synthetic End token positioned just past the last real token.
        end_.kind = TokenKind::End;
        if (!toks_.empty()) {
            const auto& last = toks_.back().span;
            end_.span = {last.line, last.column + last.length, 1};
        }
    }

    Ast program() {
        Ast ast;
        while (!at(TokenKind::End)) ast.statements.push_back(statement());
        return ast;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : end_;
    }
    bool at(TokenKind k) const { return peek().kind == k; }

    const Token& advance() {
        const Token& t = peek();
        if (pos_ < toks_.size()) ++pos_;
        last_ = t.span;
        return t;
    }

    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = peek();
        std::string found(token_kind_name(t.kind));
        if (t.kind == TokenKind::Ident) found += " '" + t.text + "'";
        throw ParseError(t.span, expected, found);
    }

    const Token& expect(TokenKind k) {
        if (!at(k)) fail(std::string(token_kind_name(k)));
        return advance();
    }

    Block block() {
        expect(TokenKind::LBrace);
        Block body;
        while (!at(TokenKind::RBrace)) {
            if (at(TokenKind::End)) fail("'}'");
            body.push_back(statement());
        }
        advance();
        return body;
    }

    Duration duration() { return expect(TokenKind::Duration).duration; }

    ClockRef clockref() {
        if (at(TokenKind::SelfKw)) {
            advance();
            return ClockRef::self();
        }
        if (at(TokenKind::Ident)) return ClockRef::named(advance().text);
        fail("clock reference ('self' or identifier)");
    }

    Statement statement() {
        const SourceSpan start = peek().span;
        Statement s;
        switch (peek().kind) {
        case TokenKind::Loop: {
            advance();
            s.node = LoopStmt{block()};
            break;
        }
        case TokenKind::If: {
            advance();
            expect(TokenKind::LParen);
            IfStmt st{expr(), {}, std::nullopt};
            expect(TokenKind::RParen);
            st.then_body = block();
            if (at(TokenKind::Else)) {
                advance();
                st.else_body = block();
            }
            s.node = std::move(st);
            break;
        }
        case TokenKind::Break:
            advance();
            expect(TokenKind::Semicolon);
            s.node = BreakStmt{};
            break;
        case TokenKind::WithSynchronization: {
            advance();
            expect(TokenKind::LParen);
            SyncBlockStmt st;
            st.sensor_set = expr();
            expect(TokenKind::Comma);
            st.precision = duration();
            expect(TokenKind::Comma);
            st.clock = clockref();
            expect(TokenKind::RParen);
            st.body = block();
            s.node = std::move(st);
            break;
        }
        case TokenKind::Every: {
            advance();
            expect(TokenKind::LParen);
            EveryBlockStmt st{duration(), {}};
            expect(TokenKind::RParen);
            st.body = block();
            s.node = std::move(st);
            break;
        }
        case TokenKind::Within: {
            advance();
            expect(TokenKind::LParen);
            WithinBlockStmt st{duration(), {}};
            expect(TokenKind::RParen);
            st.body = block();
            s.node = std::move(st);
            break;
        }
        case TokenKind::At: {
            advance();
            expect(TokenKind::LParen);
            AtBlockStmt st;
            st.instant = expect(TokenKind::AtTime).wall_time;
            expect(TokenKind::Comma);
            st.clock = clockref();
            expect(TokenKind::RParen);
            st.body = block();
            s.node = std::move(st);
            break;
        }
        case TokenKind::Ident: {
            if (peek(1).kind == TokenKind::Assign) {
                std::string target = advance().text;
                advance();
                s.node = AssignStmt{std::move(target), expr()};
            } else if (peek(1).kind == TokenKind::LParen) {
                s.node = CallStmt{call()};
            } else {
                advance();
                fail("'=' or '('");
            }
            expect(TokenKind::Semicolon);
            break;
        }
        default:
            fail("statement");
        }
        s.span = merge(start, last_);
        return s;
    }

    CallExpr call() {
        CallExpr c;
        c.name = expect(TokenKind::Ident).text;
        expect(TokenKind::LParen);
        if (!at(TokenKind::RParen)) {
            c.args.push_back(expr());
            while (at(TokenKind::Comma)) {
                advance();
                c.args.push_back(expr());
            }
        }
        expect(TokenKind::RParen);
        return c;
    }

    Expr expr() {
        const SourceSpan start = peek().span;
        Expr e;
        switch (peek().kind) {
        case TokenKind::Ident:
            if (peek(1).kind == TokenKind::LParen) {
                e.node = call();
            } else {
                e.node = IdentExpr{advance().text};
            }
            break;
        case TokenKind::Integer:
            e.node = IntLiteral{advance().integer};
            break;
        case TokenKind::Simultaneously: {
            advance();
            expect(TokenKind::LParen);
            SimultaneousExpr se;
            se.set = expect(TokenKind::Ident).text;
            expect(TokenKind::Dot);
            se.method = expect(TokenKind::Ident).text;
            expect(TokenKind::LParen);
            expect(TokenKind::RParen);
            expect(TokenKind::RParen);
            e.node = std::move(se);
            break;
        }
        default:
            fail("expression");
        }
        e.span = merge(start, last_);
        return e;
    }

    const std::vector<Token>& toks_;
    std::size_t pos_ = 0;
    Token end_;
    SourceSpan last_;
};

}  // namespace

Ast parse(const std::vector<Token>& tokens) { return Parser(tokens).program(); }

Ast parse_source(std::string_view source) { return parse(tokenize(source)); }

}  // namespace ticktalk::dsl
