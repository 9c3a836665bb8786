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

#include <string>
#include <string_view>
#include <vector>

#include "ticktalk/dsl/ast.hpp"
#include "ticktalk/dsl/token.hpp"

namespace ticktalk::dsl {

class ParseError : public Error {
public:
    ParseError(SourceSpan span, std::string expected, std::string found);

    SourceSpan span;
    std::string expected;
    std::string found;
};

/// Recursive descent over the token stream, one token of lookahead.
Ast parse(const std::vector<Token>& tokens);

/// tokenize + parse.
Ast parse_source(std::string_view source);

enum class DiagCode {
    NonPositivePrecision,
    NonPositivePeriod,
    NonPositiveBound,
    NegativeInstant,
    SimultaneousOutsideSync,
    UnboundName,
    BreakOutsideLoop,
};

std::string_view diag_code_name(DiagCode code);

struct Diagnostic {
    DiagCode code;
    SourceSpan span;
    std::string message;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Diagnostic> diagnostics);
    std::vector<Diagnostic> diagnostics;
};

/// An Ast that passed validate(). Only validate() constructs one.
class ValidatedAst {
public:
    const Ast& ast() const { return ast_; }

private:
    friend ValidatedAst validate(Ast ast);
    explicit ValidatedAst(Ast ast) : ast_(std::move(ast)) {}
    Ast ast_;
};

/// Collects every diagnostic without throwing.
std::vector<Diagnostic> check(const Ast& ast);

/// Throws ValidationError carrying all diagnostics when check() finds any.
ValidatedAst validate(Ast ast);

}  // namespace ticktalk::dsl
