#include "cotlab/datagen.hpp"

#include <algorithm>
#include <numeric>

#include "cotlab/errors.hpp"

namespace cotlab {

void GenConfig::validate() const {
    if (!is_prime(p)) throw Error("--p must be prime");
    if (task == Task::equation && vars < 1) throw Error("equation tasks need at least one variable");
    if (task == Task::lis && (length < 3 || length > static_cast<std::size_t>(kLisMax - kLisMin + 1))) {
        throw Error("LIS length must lie in [3, 150]");
    }
    if (task == Task::ed && (length < 1 || length > 64)) throw Error("ED length must lie in [1, 64]");
}

ArithInstance gen_arithmetic(std::size_t n, std::int64_t p, Rng& rng) {
    if (!is_prime(p)) throw NotPrime("modulus " + std::to_string(p) + " is not prime");
    const std::int64_t answer = rng.range(0, p - 1);
    std::vector<Token> s{{TokKind::number, answer}};
    static constexpr TokKind kOps[] = {TokKind::plus, TokKind::minus, TokKind::times, TokKind::divide};
    std::vector<std::size_t> numerals;
    for (std::size_t it = 0; it < n; ++it) {
        numerals.clear();
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i].kind == TokKind::number) numerals.push_back(i);
        }
        const std::size_t pos = numerals[rng.below(numerals.size())];
        const TokKind op = kOps[rng.below(4)];
        const FieldElement v(s[pos].value, p);
        std::int64_t t1 = 0, t2 = 0;
        switch (op) {
            case TokKind::plus:
                t2 = rng.range(0, p - 1);
                t1 = (v - FieldElement(t2, p)).value();
                break;
            case TokKind::minus:
                t2 = rng.range(0, p - 1);
                t1 = (v + FieldElement(t2, p)).value();
                break;
            case TokKind::times:
                // t2 = 0 only decomposes 0, and then any t1 works.
                if (v.value() == 0) {
                    t2 = rng.range(0, p - 1);
                    t1 = t2 == 0 ? rng.range(0, p - 1) : 0;
                } else {
                    t2 = rng.range(1, p - 1);
                    t1 = (v / FieldElement(t2, p)).value();
                }
                break;
            default:
                t2 = rng.range(1, p - 1);
                t1 = (v * FieldElement(t2, p)).value();
                break;
        }
        const bool has_left = pos > 0;
        const bool has_right = pos + 1 < s.size();
        const TokKind left = has_left ? s[pos - 1].kind : TokKind::equals;
        const TokKind right = has_right ? s[pos + 1].kind : TokKind::equals;
        const bool bracket = (has_left && left == TokKind::divide) ||
                             (is_additive(op) && has_left && (left == TokKind::minus || left == TokKind::times)) ||
                             (is_additive(op) && has_right && is_multiplicative(right));
        std::vector<Token> piece;
        if (bracket) piece.push_back({TokKind::lparen, 0});
        piece.push_back({TokKind::number, t1});
        piece.push_back({op, 0});
        piece.push_back({TokKind::number, t2});
        if (bracket) piece.push_back({TokKind::rparen, 0});
        s.erase(s.begin() + static_cast<long>(pos));
        s.insert(s.begin() + static_cast<long>(pos), piece.begin(), piece.end());
    }
    return {Expr{std::move(s), p}, answer};
}

LinearSystem gen_equation(std::size_t m, std::int64_t p, Rng& rng) {
    LinearSystem sys(m, p);
    for (auto& v : sys.b) v = rng.range(0, p - 1);
    do {
        for (auto& v : sys.A) v = rng.range(0, p - 1);
    } while (determinant(sys) == 0);
    return sys;
}

namespace {

// k distinct values from [lo, hi] in sampling order.
std::vector<std::int64_t> sample_distinct(std::int64_t lo, std::int64_t hi, std::size_t k, Rng& rng) {
    std::vector<std::int64_t> pool(static_cast<std::size_t>(hi - lo + 1));
    std::iota(pool.begin(), pool.end(), lo);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace

LisInstance gen_lis(std::size_t n, Rng& rng) {
    if (n < 3) throw Error("LIS length must be at least 3");
    const std::size_t l = static_cast<std::size_t>(rng.range(3, static_cast<std::int64_t>(n)));
    const std::size_t t = static_cast<std::size_t>(rng.range(1, 3));
    std::vector<std::size_t> a{0};
    if (t == 2) {
        a.push_back(static_cast<std::size_t>(rng.range(1, static_cast<std::int64_t>(l / 2 + 1))));
    } else if (t == 3) {
        const auto j = static_cast<std::size_t>(rng.range(1, static_cast<std::int64_t>(l / 3 + 1)));
        const auto k = static_cast<std::size_t>(rng.range(1, static_cast<std::int64_t>((l - j) / 2 + 1)));
        a.push_back(j);
        a.push_back(j + k);
    }
    a.push_back(l);
    std::vector<std::int64_t> s = sample_distinct(kLisMin, kLisMax, l, rng);
    for (std::size_t i = 1; i <= t; ++i) {
        std::sort(s.begin() + static_cast<long>(a[i - 1]), s.begin() + static_cast<long>(a[i]));
    }
    const std::vector<std::int64_t> r = sample_distinct(kLisMin, kLisMax, n - l, rng);
    for (std::int64_t v : r) {
        const std::size_t at = rng.below(s.size() + 1);
        s.insert(s.begin() + static_cast<long>(at), v);
    }
    return {std::move(s), l, t};
}

EdInstance gen_ed(std::size_t n, Rng& rng) {
    EdInstance out;
    const std::size_t t = static_cast<std::size_t>(rng.range(3, 10));
    for (std::int64_t c : sample_distinct('a', 'z', t, rng)) out.alphabet.push_back(static_cast<char>(c));
    auto letter = [&] { return out.alphabet[rng.below(out.alphabet.size())]; };
    for (std::size_t i = 0; i < n; ++i) out.s1.push_back(letter());
    const long lo = std::max(0L, static_cast<long>(n) - 3);
    const long hi = static_cast<long>(n) + 2;
    out.independent = rng.unit() < 0.4;
    if (out.independent) {
        const auto len = static_cast<std::size_t>(rng.range(lo, hi));
        for (std::size_t i = 0; i < len; ++i) out.s2.push_back(letter());
        return out;
    }
    do {
        out.s2 = out.s1;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t pos = out.s2.empty() ? 0 : rng.below(out.s2.size());
            const char c = letter();
            // An empty string only admits an insertion.
            const std::uint64_t action = out.s2.empty() ? 2 : rng.below(3);
            if (action == 0) {
                out.s2.erase(pos, 1);
            } else if (action == 1) {
                out.s2[pos] = c;
            } else {
                out.s2.insert(out.s2.begin() + static_cast<long>(pos), c);
            }
        }
    } while (static_cast<long>(out.s2.size()) < lo || static_cast<long>(out.s2.size()) > hi);
    return out;
}

CotSample gen_sample(const GenConfig& cfg, std::uint64_t stream) {
    Rng rng(derive_seed(cfg.seed, stream));
    switch (cfg.task) {
        case Task::arithmetic: return cot_trace(gen_arithmetic(cfg.ops, cfg.p, rng).expr);
        case Task::equation: return gauss_trace(gen_equation(cfg.vars, cfg.p, rng));
        case Task::lis: return lis_sample(gen_lis(cfg.length, rng).seq);
        case Task::ed: {
            EdInstance e = gen_ed(cfg.length, rng);
            return ed_sample(e.s1, e.s2, EdCosts{});
        }
    }
    throw Error("unknown task");
}

}  // namespace cotlab
