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
#include <string>
#include <string_view>
#include <vector>

#include "ticktalk/common.hpp"

namespace ticktalk::dsl {

enum class TokenKind {
    Ident,
    Integer,
    Duration,
    AtTime,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semicolon,
    Dot,
    Assign,
    // keywords
    Loop,
    If,
    Else,
    Break,
    WithSynchronization,
    Simultaneously,
    Every,
    Within,
    At,
    SelfKw,
    End,
};

std::string_view token_kind_name(TokenKind kind);

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    SourceSpan span;

    std::uint64_t integer = 0;   // Integer
    ticktalk::Duration duration; // Duration
    WallTime wall_time;          // AtTime

    /// Kind and payload equality; spans are ignored.
    bool same_lexeme(const Token& other) const;
};

class LexError : public Error {
public:
    LexError(SourceSpan span, const std::string& message);
    SourceSpan span;
};

/// Splits source text into tokens. Comments (`// ...`) and whitespace are
/// dropped; the returned sequence has no trailing End token.
std::vector<Token> tokenize(std::string_view source);

}  // namespace ticktalk::dsl
