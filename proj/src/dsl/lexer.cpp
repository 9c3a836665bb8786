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

#include "ticktalk/dsl/token.hpp"

#include <charconv>
#include <unordered_map>

namespace ticktalk::dsl {

std::string_view token_kind_name(TokenKind kind) {
    switch (kind) {
    case TokenKind::Ident: return "identifier";
    case TokenKind::Integer: return "integer";
    case TokenKind::Duration: return "duration";
    case TokenKind::AtTime: return "wall time";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBrace: return "'{'";
    case TokenKind::RBrace: return "'}'";
    case TokenKind::Comma: return "','";
    case TokenKind::Semicolon: return "';'";
    case TokenKind::Dot: return "'.'";
    case TokenKind::Assign: return "'='";
    case TokenKind::Loop: return "'loop'";
    case TokenKind::If: return "'if'";
    case TokenKind::Else: return "'else'";
    case TokenKind::Break: return "'break'";
    case TokenKind::WithSynchronization: return "'withSynchronization'";
    case TokenKind::Simultaneously: return "'simultaneously'";
    case TokenKind::Every: return "'every'";
    case TokenKind::Within: return "'within'";
    case TokenKind::At: return "'at'";
    case TokenKind::SelfKw: return "'self'";
    case TokenKind::End: return "end of input";
    }
    return "?";
}

bool Token::same_lexeme(const Token& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
    case TokenKind::Ident: return text == other.text;
    case TokenKind::Integer: return integer == other.integer;
    case TokenKind::Duration: return duration == other.duration;
    case TokenKind::AtTime: return wall_time == other.wall_time;
    default: return true;
    }
}

LexError::LexError(SourceSpan s, const std::string& message)
    : Error(std::to_string(s.line) + ":" + std::to_string(s.column) + ": " + message), span(s) {}

namespace {

const std::unordered_map<std::string_view, TokenKind>& keywords() {
    static const std::unordered_map<std::string_view, TokenKind> table = {
        {"loop", TokenKind::Loop},
        {"if", TokenKind::If},
        {"else", TokenKind::Else},
        {"break", TokenKind::Break},
        {"withSynchronization", TokenKind::WithSynchronization},
        {"simultaneously", TokenKind::Simultaneously},
        {"every", TokenKind::Every},
        {"within", TokenKind::Within},
        {"at", TokenKind::At},
        {"self", TokenKind::SelfKw},
    };
    return table;
}

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_trivia();
            if (pos_ >= src_.size()) break;
            out.push_back(next());
        }
        return out;
    }

private:
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    SourceSpan span_from(int line, int col, std::size_t start) const {
        return {line, col, static_cast<int>(pos_ - start)};
    }

    Token next() {
        const int line = line_;
        const int col = col_;
        const std::size_t start = pos_;
        const char c = peek();

        Token tok;
        auto single = [&](TokenKind kind) {
            advance();
            tok.kind = kind;
        };

        if (is_ident_start(c)) {
            while (is_ident_char(peek())) advance();
            tok.text = std::string(src_.substr(start, pos_ - start));
            auto kw = keywords().find(tok.text);
            tok.kind = kw == keywords().end() ? TokenKind::Ident : kw->second;
        } else if (is_digit(c)) {
            lex_number(tok, start, line, col);
        } else if (c == '@') {
            lex_wall_time(tok, start, line, col);
        } else {
            switch (c) {
            case '(': single(TokenKind::LParen); break;
            case ')': single(TokenKind::RParen); break;
            case '{': single(TokenKind::LBrace); break;
            case '}': single(TokenKind::RBrace); break;
            case ',': single(TokenKind::Comma); break;
            case ';': single(TokenKind::Semicolon); break;
            case '.': single(TokenKind::Dot); break;
            case '=': single(TokenKind::Assign); break;
            default: {
                std::string shown = (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f)
                                        ? "byte 0x" + hex(static_cast<unsigned char>(c))
                                        : std::string("'") + c + "'";
                throw LexError({line, col, 1}, "unrecognized character " + shown);
            }
            }
            tok.text = std::string(src_.substr(start, pos_ - start));
        }
        tok.span = span_from(line, col, start);
        return tok;
    }

    void lex_number(Token& tok, std::size_t start, int line, int col) {
        while (is_digit(peek())) advance();
        const std::size_t digits_end = pos_;
        while (is_ident_char(peek())) advance();
        tok.text = std::string(src_.substr(start, pos_ - start));
        const SourceSpan span = span_from(line, col, start);

        if (digits_end == pos_) {
            tok.kind = TokenKind::Integer;
            auto [p, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.integer);
            if (ec != std::errc{}) throw LexError(span, "integer literal out of range: " + tok.text);
            return;
        }
        auto d = parse_duration(tok.text);
        if (!d) throw LexError(span, "malformed duration literal '" + tok.text + "' (units: ns, us, ms, s)");
        tok.kind = TokenKind::Duration;
        tok.duration = *d;
    }

    void lex_wall_time(Token& tok, std::size_t start, int line, int col) {
        advance();  // '@'
        while (is_digit(peek()) || peek() == ':') advance();
        if ((peek() == 'A' || peek() == 'P') && peek(1) == 'M') {
            advance();
            advance();
        }
        // Swallow trailing identifier characters so "@4:35PMX" is one bad literal.
        while (is_ident_char(peek())) advance();
        tok.text = std::string(src_.substr(start, pos_ - start));
        auto wt = parse_wall_time(tok.text);
        if (!wt) throw LexError(span_from(line, col, start), "malformed wall-time literal '" + tok.text + "'");
        tok.kind = TokenKind::AtTime;
        tok.wall_time = *wt;
    }

    static std::string hex(unsigned v) {
        static const char* digits = "0123456789abcdef";
        return {digits[(v >> 4) & 0xf], digits[v & 0xf]};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace ticktalk::dsl
