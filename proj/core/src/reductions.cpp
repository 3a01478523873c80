#include "cotlab/datagen.hpp"

#include "cotlab/errors.hpp"

namespace cotlab {

namespace {

enum class B { zero, one, neg, conj, disj, lp, rp };

std::vector<B> lex_boolean(std::string_view s) {
    std::vector<B> out;
    std::size_t i = 0;
    auto starts = [&](std::string_view w) { return s.substr(i, w.size()) == w; };
    while (i < s.size()) {
        if (s[i] == ' ') { ++i; continue; }
        if (s[i] == '0') { out.push_back(B::zero); ++i; }
        else if (s[i] == '1') { out.push_back(B::one); ++i; }
        else if (s[i] == '(') { out.push_back(B::lp); ++i; }
        else if (s[i] == ')') { out.push_back(B::rp); ++i; }
        else if (s[i] == '!' || s[i] == '~') { out.push_back(B::neg); ++i; }
        else if (s[i] == '&') { out.push_back(B::conj); ++i; }
        else if (s[i] == '|') { out.push_back(B::disj); ++i; }
        else if (starts("¬")) { out.push_back(B::neg); i += std::string_view("¬").size(); }
        else if (starts("∧")) { out.push_back(B::conj); i += std::string_view("∧").size(); }
        else if (starts("∨")) { out.push_back(B::disj); i += std::string_view("∨").size(); }
        else throw ParseError("unknown symbol in Boolean formula", out.size());
    }
    return out;
}

// primary := 0 | 1 | '(' inner ')'
// inner   := '¬' primary | primary [('∧' | '∨') primary]
// The whole input is an inner form, so "¬1" and "(1∨0)" are both accepted.
class BoolParser {
public:
    explicit BoolParser(std::vector<B> toks) : t_(std::move(toks)) {}

    template <class Emit>
    void run(Emit& emit) {
        inner(emit);
        if (i_ != t_.size()) throw ParseError("trailing symbols in Boolean formula", i_);
    }

private:
    template <class Emit>
    void primary(Emit& emit) {
        if (i_ >= t_.size()) throw ParseError("unexpected end of Boolean formula", i_);
        if (t_[i_] == B::zero || t_[i_] == B::one) {
            emit.constant(t_[i_] == B::one);
            ++i_;
            return;
        }
        if (t_[i_] != B::lp) throw ParseError("expected 0, 1 or '('", i_);
        ++i_;
        emit.open();
        inner(emit);
        if (i_ >= t_.size() || t_[i_] != B::rp) throw ParseError("expected ')'", i_);
        ++i_;
        emit.close();
    }

    template <class Emit>
    void inner(Emit& emit) {
        if (i_ < t_.size() && t_[i_] == B::neg) {
            ++i_;
            emit.begin_not();
            primary(emit);
            emit.end_not();
            return;
        }
        auto mark = emit.mark();
        primary(emit);
        if (i_ < t_.size() && (t_[i_] == B::conj || t_[i_] == B::disj)) {
            const bool disj = t_[i_] == B::disj;
            ++i_;
            emit.begin_binary(mark, disj);
            primary(emit);
            emit.end_binary(disj);
        }
    }

    std::vector<B> t_;
    std::size_t i_ = 0;
};

struct ArithEmitter {
    std::vector<Token> out;

    void constant(bool v) { out.push_back({TokKind::number, v ? 1 : 0}); }
    void open() { out.push_back({TokKind::lparen, 0}); }
    void close() { out.push_back({TokKind::rparen, 0}); }
    void begin_not() {
        out.push_back({TokKind::number, 1});
        out.push_back({TokKind::minus, 0});
    }
    void end_not() {}
    std::size_t mark() const { return out.size(); }
    // f(a ∨ b) = 1 − (1 − f(a)) × (1 − f(b)); the left operand is already
    // emitted from `at`, so its prefix is spliced in front of it.
    void begin_binary(std::size_t at, bool disj) {
        if (disj) {
            const std::vector<Token> prefix{{TokKind::number, 1}, {TokKind::minus, 0}, {TokKind::lparen, 0},
                                            {TokKind::number, 1}, {TokKind::minus, 0}};
            out.insert(out.begin() + static_cast<long>(at), prefix.begin(), prefix.end());
            out.push_back({TokKind::rparen, 0});
            out.push_back({TokKind::times, 0});
            out.push_back({TokKind::lparen, 0});
            out.push_back({TokKind::number, 1});
            out.push_back({TokKind::minus, 0});
        } else {
            out.push_back({TokKind::times, 0});
        }
    }
    void end_binary(bool disj) {
        if (disj) out.push_back({TokKind::rparen, 0});
    }
};

struct TruthEmitter {
    std::vector<int> stack;
    std::vector<int> pending_not;
    std::vector<std::pair<bool, std::size_t>> pending_bin;

    void constant(bool v) { stack.push_back(v ? 1 : 0); }
    void open() {}
    void close() {}
    void begin_not() { pending_not.push_back(1); }
    void end_not() {
        stack.back() = 1 - stack.back();
        pending_not.pop_back();
    }
    std::size_t mark() const { return stack.size(); }
    void begin_binary(std::size_t, bool disj) { pending_bin.emplace_back(disj, 0); }
    void end_binary(bool disj) {
        const int b = stack.back();
        stack.pop_back();
        const int a = stack.back();
        stack.back() = disj ? (a | b) : (a & b);
        pending_bin.pop_back();
    }
};

}  // namespace

Expr reduce_boolean(std::string_view formula, std::int64_t p) {
    ArithEmitter em;
    BoolParser(lex_boolean(formula)).run(em);
    Expr e{std::move(em.out), p};
    return parse_tokens(to_tokens(e), p);
}

int eval_boolean(std::string_view formula) {
    TruthEmitter em;
    BoolParser(lex_boolean(formula)).run(em);
    return em.stack.back();
}

void Automaton::validate() const {
    if (num_states < 1 || num_symbols < 1) throw Error("automaton needs states and symbols");
    if (delta.size() != static_cast<std::size_t>(num_states * num_symbols)) throw Error("transition table is not total");
    if (accept.size() != static_cast<std::size_t>(num_states)) throw Error("accept set has wrong size");
    if (q0 < 0 || q0 >= num_states) throw Error("initial state out of range");
    for (int q : delta) {
        if (q < 0 || q >= num_states) throw Error("transition target out of range");
    }
}

bool simulate(const Automaton& d, const std::vector<int>& word) {
    int q = d.q0;
    for (int a : word) q = d.step(q, a);
    return d.accept[static_cast<std::size_t>(q)];
}

AutomatonReduction reduce_automaton(const Automaton& d, const std::vector<int>& word, std::int64_t p) {
    d.validate();
    for (int a : word) {
        if (a < 0 || a >= d.num_symbols) throw Error("word symbol outside the alphabet");
    }
    const std::size_t n = word.size();
    const std::size_t Q = static_cast<std::size_t>(d.num_states);
    AutomatonReduction red;
    red.num_states = d.num_states;
    red.system = LinearSystem(1 + Q * (n + 1), p);
    LinearSystem& s = red.system;
    const std::int64_t neg1 = p - 1;
    std::size_t row = 0;
    // x* = sum over accepting q of x_{n,q}
    s.a(row, red.x_star) = 1;
    for (std::size_t q = 0; q < Q; ++q) {
        if (d.accept[q]) s.a(row, red.var(n, static_cast<int>(q))) = neg1;
    }
    ++row;
    for (std::size_t q = 0; q < Q; ++q, ++row) {
        s.a(row, red.var(0, static_cast<int>(q))) = 1;
        s.b[row] = static_cast<int>(q) == d.q0 ? 1 : 0;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t q = 0; q < Q; ++q, ++row) {
            s.a(row, red.var(i, static_cast<int>(q))) = 1;
            for (std::size_t r = 0; r < Q; ++r) {
                if (static_cast<std::size_t>(d.step(static_cast<int>(r), word[i - 1])) == q) {
                    s.a(row, red.var(i - 1, static_cast<int>(r))) = neg1;
                }
            }
        }
    }
    return red;
}

}  // namespace cotlab
