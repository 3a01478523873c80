#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cotlab/cot.hpp"
#include "cotlab/field.hpp"

namespace cotlab {

enum class TokKind : std::uint8_t { number, plus, minus, times, divide, lparen, rparen, equals };

struct Token {
    TokKind kind = TokKind::number;
    std::int64_t value = 0;  // only meaningful for numbers

    friend bool operator==(const Token&, const Token&) = default;
};

inline bool is_op(TokKind k) {
    return k == TokKind::plus || k == TokKind::minus || k == TokKind::times || k == TokKind::divide;
}
inline bool is_additive(TokKind k) { return k == TokKind::plus || k == TokKind::minus; }
inline bool is_multiplicative(TokKind k) { return k == TokKind::times || k == TokKind::divide; }

bool is_operator_text(std::string_view t);

struct Expr {
    std::vector<Token> tokens;
    std::int64_t p = 11;

    std::size_t operator_count() const;
    bool has_equals() const { return !tokens.empty() && tokens.back().kind == TokKind::equals; }

    friend bool operator==(const Expr&, const Expr&) = default;
};

std::string token_text(const Token& t);

// Space-separated tokens. Accepts '-', '*', '/' as ASCII aliases.
Expr parse_expr(std::string_view text, std::int64_t p);
// Same grammar, but tokens need not be separated ("1+5×(1−2)=").
Expr parse_compact(std::string_view text, std::int64_t p);
Expr parse_tokens(const Tokens& toks, std::int64_t p);
std::string render(const Expr& e);
Tokens to_tokens(const Expr& e);

FieldElement evaluate(const Expr& e);

struct Handle {
    std::size_t start;  // index of the left numeral
    TokKind op;

    friend bool operator==(const Handle&, const Handle&) = default;
};

std::vector<Handle> find_handles(const Expr& e);
Expr cot_step(const Expr& e);
CotSample cot_trace(const Expr& e);

// Per-position pairing: '(' -> (-1, partner), ')' -> (partner, -1),
// anything else -> the innermost enclosing pair, or (kTopLevel, kTopLevel).
struct BracketRecord {
    long left;
    long right;

    friend bool operator==(const BracketRecord&, const BracketRecord&) = default;
};
inline constexpr long kTopLevel = -2;

std::vector<BracketRecord> match_brackets(const Tokens& toks);
std::vector<BracketRecord> match_brackets(const Expr& e);

}  // namespace cotlab
