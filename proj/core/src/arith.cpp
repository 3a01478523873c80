#include "cotlab/arith.hpp"

#include <cassert>
#include <charconv>

#include "cotlab/errors.hpp"

namespace cotlab {

namespace {

bool lookup_symbol(std::string_view t, TokKind& kind) {
    if (t == "+") kind = TokKind::plus;
    else if (t == "−" || t == "-") kind = TokKind::minus;
    else if (t == "×" || t == "*") kind = TokKind::times;
    else if (t == "÷" || t == "/") kind = TokKind::divide;
    else if (t == "(") kind = TokKind::lparen;
    else if (t == ")") kind = TokKind::rparen;
    else if (t == "=") kind = TokKind::equals;
    else return false;
    return true;
}

Token read_token(std::string_view t, std::int64_t p, std::size_t pos) {
    Token tok;
    if (lookup_symbol(t, tok.kind)) return tok;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || t[0] == '-' || t[0] == '+') {
        throw ParseError("unknown token '" + std::string(t) + "'", pos);
    }
    if (v >= p) throw ParseError("numeral " + std::string(t) + " outside Z_" + std::to_string(p), pos);
    tok.kind = TokKind::number;
    tok.value = v;
    return tok;
}

// Recursive-descent validator; evaluation reuses the same shape.
class Parser {
public:
    Parser(const std::vector<Token>& toks, std::int64_t p, bool eval)
        : toks_(toks), p_(p), eval_(eval) {}

    std::int64_t run() {
        std::size_t end = toks_.size();
        if (end > 0 && toks_[end - 1].kind == TokKind::equals) --end;
        end_ = end;
        if (end_ == 0) throw ParseError("empty expression", 0);
        std::int64_t v = expr();
        if (pos_ != end_) throw ParseError("unexpected token", pos_);
        return v;
    }

private:
    std::int64_t expr() {
        std::int64_t v = term();
        while (pos_ < end_ && is_additive(toks_[pos_].kind)) {
            TokKind k = toks_[pos_++].kind;
            std::int64_t r = term();
            if (eval_) v = mod_normalize(k == TokKind::plus ? v + r : v - r, p_);
        }
        return v;
    }

    std::int64_t term() {
        std::int64_t v = factor();
        while (pos_ < end_ && is_multiplicative(toks_[pos_].kind)) {
            TokKind k = toks_[pos_++].kind;
            std::int64_t r = factor();
            if (eval_) {
                FieldElement a(v, p_), b(r, p_);
                v = (k == TokKind::times ? a * b : a / b).value();
            }
        }
        return v;
    }

    std::int64_t factor() {
        if (pos_ >= end_) throw ParseError("expected numeral or '('", pos_);
        const Token& t = toks_[pos_];
        if (t.kind == TokKind::number) {
            ++pos_;
            return t.value;
        }
        if (t.kind == TokKind::lparen) {
            ++pos_;
            std::int64_t v = expr();
            if (pos_ >= end_ || toks_[pos_].kind != TokKind::rparen) throw ParseError("expected ')'", pos_);
            ++pos_;
            return v;
        }
        throw ParseError("expected numeral or '('", pos_);
    }

    const std::vector<Token>& toks_;
    std::int64_t p_;
    bool eval_;
    std::size_t pos_ = 0;
    std::size_t end_ = 0;
};

Expr validated(std::vector<Token> toks, std::int64_t p) {
    if (!is_prime(p)) throw NotPrime("modulus " + std::to_string(p) + " is not prime");
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i].kind == TokKind::equals) throw ParseError("'=' must be the last token", i);
    }
    Expr e{std::move(toks), p};
    Parser(e.tokens, p, false).run();
    return e;
}

}  // namespace

bool is_operator_text(std::string_view t) {
    TokKind k;
    return lookup_symbol(t, k) && is_op(k);
}

std::size_t Expr::operator_count() const {
    std::size_t n = 0;
    for (const auto& t : tokens) n += is_op(t.kind) ? 1 : 0;
    return n;
}

std::string token_text(const Token& t) {
    switch (t.kind) {
        case TokKind::number: return std::to_string(t.value);
        case TokKind::plus: return "+";
        case TokKind::minus: return "−";
        case TokKind::times: return "×";
        case TokKind::divide: return "÷";
        case TokKind::lparen: return "(";
        case TokKind::rparen: return ")";
        case TokKind::equals: return "=";
    }
    return "?";
}

Expr parse_tokens(const Tokens& toks, std::int64_t p) {
    std::vector<Token> out;
    out.reserve(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) out.push_back(read_token(toks[i], p, i));
    return validated(std::move(out), p);
}

Expr parse_expr(std::string_view text, std::int64_t p) { return parse_tokens(split_ws(text), p); }

Expr parse_compact(std::string_view text, std::int64_t p) {
    Tokens toks;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c == ' ') {
            ++i;
        } else if (c >= '0' && c <= '9') {
            std::size_t j = i;
            while (j < text.size() && text[j] >= '0' && text[j] <= '9') ++j;
            toks.emplace_back(text.substr(i, j - i));
            i = j;
        } else if (c < 0x80) {
            toks.emplace_back(text.substr(i, 1));
            ++i;
        } else {
            std::size_t len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : 2;
            toks.emplace_back(text.substr(i, len));
            i += len;
        }
    }
    return parse_tokens(toks, p);
}

Tokens to_tokens(const Expr& e) {
    Tokens out;
    out.reserve(e.tokens.size());
    for (const auto& t : e.tokens) out.push_back(token_text(t));
    return out;
}

std::string render(const Expr& e) { return join(to_tokens(e)); }

FieldElement evaluate(const Expr& e) { return FieldElement(Parser(e.tokens, e.p, true).run(), e.p); }

std::vector<Handle> find_handles(const Expr& e) {
    const auto& t = e.tokens;
    std::vector<Handle> out;
    for (std::size_t i = 0; i + 2 < t.size(); ++i) {
        if (t[i].kind != TokKind::number || !is_op(t[i + 1].kind) || t[i + 2].kind != TokKind::number) continue;
        const bool left_boundary = i == 0 || t[i - 1].kind == TokKind::equals;
        const TokKind left = left_boundary ? TokKind::equals : t[i - 1].kind;
        const bool right_mul = i + 3 < t.size() && is_multiplicative(t[i + 3].kind);
        const TokKind op = t[i + 1].kind;
        bool ok;
        if (is_additive(op)) {
            ok = (left_boundary || left == TokKind::lparen) && !right_mul;
        } else {
            ok = left_boundary || !is_multiplicative(left);
        }
        if (ok) out.push_back({i, op});
    }
    return out;
}

Expr cot_step(const Expr& e) {
    auto handles = find_handles(e);
    assert(!handles.empty());
    if (handles.empty()) throw ParseError("no reducible handle", 0);
    const std::size_t s = handles.front().start;
    const auto& t = e.tokens;
    FieldElement a(t[s].value, e.p), b(t[s + 2].value, e.p);
    FieldElement v(0, e.p);
    switch (t[s + 1].kind) {
        case TokKind::plus: v = a + b; break;
        case TokKind::minus: v = a - b; break;
        case TokKind::times: v = a * b; break;
        default: v = a / b; break;
    }
    std::size_t lo = s, hi = s + 3;  // replaced range [lo, hi)
    if (lo > 0 && hi < t.size() && t[lo - 1].kind == TokKind::lparen && t[hi].kind == TokKind::rparen) {
        --lo;
        ++hi;
    }
    Expr out;
    out.p = e.p;
    out.tokens.reserve(t.size() - (hi - lo) + 1);
    out.tokens.insert(out.tokens.end(), t.begin(), t.begin() + static_cast<long>(lo));
    out.tokens.push_back({TokKind::number, v.value()});
    out.tokens.insert(out.tokens.end(), t.begin() + static_cast<long>(hi), t.end());
    return out;
}

CotSample cot_trace(const Expr& e) {
    CotSample s;
    s.task = Task::arithmetic;
    Expr cur = e;
    if (cur.has_equals()) cur.tokens.pop_back();
    s.problem = to_tokens(cur);
    while (cur.operator_count() > 0) {
        cur = cot_step(cur);
        s.steps.push_back(to_tokens(cur));
    }
    s.answer = to_tokens(cur);
    return s;
}

std::vector<BracketRecord> match_brackets(const Tokens& toks) {
    std::vector<BracketRecord> out(toks.size(), {kTopLevel, kTopLevel});
    std::vector<long> stack;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i] == "(") {
            stack.push_back(static_cast<long>(i));
        } else if (toks[i] == ")") {
            if (stack.empty()) throw UnbalancedBrackets("unmatched ')' at " + std::to_string(i));
            long j = stack.back();
            stack.pop_back();
            out[static_cast<std::size_t>(j)] = {-1, static_cast<long>(i)};
            out[i] = {j, -1};
        }
    }
    if (!stack.empty()) throw UnbalancedBrackets("unmatched '(' at " + std::to_string(stack.back()));
    // Innermost enclosing pair for the remaining positions.
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i] == "(" || toks[i] == ")") continue;
        for (long j = static_cast<long>(i) - 1; j >= 0; --j) {
            const auto& r = out[static_cast<std::size_t>(j)];
            if (toks[static_cast<std::size_t>(j)] == "(" && r.right > static_cast<long>(i)) {
                out[i] = {j, r.right};
                break;
            }
        }
    }
    return out;
}

std::vector<BracketRecord> match_brackets(const Expr& e) { return match_brackets(to_tokens(e)); }

}  // namespace cotlab
