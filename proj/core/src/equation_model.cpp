#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "cotlab/equation.hpp"
#include "cotlab/field.hpp"
#include "cotlab/model.hpp"
#include "model_build.hpp"

namespace cotlab {

using detail::Form;
using detail::GadgetBuilder;
using detail::MlpBuilder;
using detail::ReluUnits;
using detail::relu_net;

namespace {

constexpr double kUnitMultEps = 2e-5;
constexpr double kFracEps = 1e-9;
constexpr double kCopyEps = 1e-6;
constexpr double kUnitEps = 1e-5;
constexpr double kDelta = 0.5;

// Token ids of the shared embedding: numerals, then symbols, then one id for every variable.
struct Ids {
    int p;
    int plus() const { return p; }
    int eq() const { return p + 1; }
    int comma() const { return p + 2; }
    int sep() const { return p + 3; }
    int eos() const { return p + 4; }
    int var() const { return p + 5; }
    int size() const { return p + 6; }
};

double angle(std::size_t v, std::size_t m) { return 2 * std::numbers::pi * static_cast<double>(v) / static_cast<double>(m); }

// Output vector of a variable token; the unembedding uses the same vector as weights.
std::vector<double> var_code(std::size_t v, std::size_t m) {
    const double s = static_cast<double>(m * m);
    return {static_cast<double>(v), s * std::sin(angle(v, m)), s * std::cos(angle(v, m))};
}

// Coefficient arithmetic of one elimination step, keyed on the copied coefficients.
// Groups: a, b, c, c', e, e', [r = k], [r = q], gate. Flag groups use symbol 0 for
// a true flag and 1 for a false one.
LookupTable coefficient_table(std::int64_t p) {
    const auto P = static_cast<std::size_t>(p);
    LookupTable t{9, P, P, {}};
    auto one_hot = [&](std::int64_t v) {
        Vec out = Vec::Zero(static_cast<Eigen::Index>(P));
        out(static_cast<Eigen::Index>(v)) = 1;
        return out;
    };
    for (int a = 1; a < p; ++a) {
        const FieldElement fa(a, p);
        for (int b = 0; b < p; ++b) {
            const FieldElement ratio = FieldElement(b, p) / fa;
            t.entries.push_back({{a, b, -1, -1, -1, -1, 0, -1, 0}, one_hot(ratio.value())});
            for (int c = 0; c < p; ++c) {
                for (int e = 0; e < p; ++e) {
                    const auto v = (FieldElement(e, p) - FieldElement(c, p) * ratio).value();
                    t.entries.push_back({{a, b, c, -1, e, -1, 1, 1, 0}, one_hot(v)});
                    t.entries.push_back({{a, b, -1, c, -1, e, 1, 0, 0}, one_hot(v)});
                }
            }
        }
    }
    return t;
}

}  // namespace

double equation_unembedding_gap(std::size_t m) {
    if (m == 0) throw DimensionMismatch("m must be positive");
    // Weight rows over (id of one symbol, id of another symbol, variable id, code); the
    // correct token t scores |w_t|^2 and a competitor u scores w_t . w_u.
    std::vector<std::vector<double>> w{{1, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0}};
    for (std::size_t v = 1; v <= m; ++v) {
        const auto l = var_code(v, m);
        w.push_back({0, 0, 1, l[0], l[1], l[2]});
    }
    auto dot = [](const std::vector<double>& x, const std::vector<double>& y) {
        double s = 0;
        for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
        return s;
    };
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < w.size(); ++t)
        for (std::size_t u = 0; u < w.size(); ++u)
            if (t != u) gap = std::min(gap, dot(w[t], w[t]) - dot(w[t], w[u]));
    return gap;
}

std::size_t equation_trace_bound(std::size_t m) {
    std::size_t n = m * (3 * m + 2) + m + 1;
    for (std::size_t k = 1; k <= m; ++k) n += k * (3 * (m - k) + 4) + (m - k) * (3 * (m - k) + 2);
    return n + 1;
}

ModelSpec build_equation_model(std::size_t m_max, std::int64_t p, double eps, std::size_t n_max) {
    if (!is_prime(p)) throw NotPrime("modulus " + std::to_string(p) + " is not prime");
    if (m_max < 1) throw DimensionMismatch("m_max must be at least 1");
    if (!(eps > 0 && eps < 0.5)) throw AssumptionViolated("end-to-end eps must lie in (0, 0.5)");
    if (n_max == 0) n_max = equation_trace_bound(m_max);
    const Ids id{static_cast<int>(p)};
    const auto E = static_cast<std::size_t>(id.size());
    const auto P = static_cast<std::size_t>(p);
    const double n = static_cast<double>(n_max);
    const double mm = static_cast<double>(m_max);
    const double msq = mm * mm;
    // Gate constant of the big-M units; every gated quantity is below (m + 2)^2.
    const double G = 2 * (mm + 2) * (mm + 2);

    ModelSpec m;
    m.task = Task::equation;
    m.p = p;
    m.n_max = n_max;
    m.m_max = m_max;
    m.eps = eps;
    for (int v = 0; v < id.p; ++v) m.vocab.push_back(std::to_string(v));
    for (const char* t : {"+", "=", ","}) m.vocab.emplace_back(t);
    m.vocab.emplace_back(kSep);
    m.vocab.emplace_back(kEos);
    for (std::size_t v = 0; v < m_max; ++v) m.vocab.push_back(variable_token(v));

    SlotLayout& L = m.layout;
    L.add("e", E, "token id; all variables share one id", 1);
    L.add("l", 3, "variable code (j, m^2 sin, m^2 cos), zero for other tokens", msq);
    L.add("varsq", 1, "variable index squared", msq);
    L.add("pos", 1, "position i, 1-based", n);
    L.add("one", 1, "constant 1", 1);
    L.add("L1.comma_frac", 1, "fraction of ',' up to i", 1, 1e-9);
    L.add("L1.sep_frac", 1, "fraction of '[SEP]' up to i", 1, 1e-9);
    L.add("L1.nvar", 1, "largest variable index so far", mm, 1e-5);
    L.add("L1.neq", 1, "number of ',' up to i", n, 1e-5);
    L.add("L1.ncot", 1, "number of '[SEP]' up to i (the step being written)", n, 1e-5);
    L.add("L1.pos_sq", 1, "i^2", n * n, 1e-5);
    L.add("L1.first", 1, "[i = 1]", 1, 1e-5);
    L.add("L2.neq_sep", 1, "neq at the last '[SEP]', or 0", n, 1e-4);
    L.add("L2.first_zero", 1, "the first numeral of the current equation is 0", 1, 1e-4);
    L.add("L2.p1_e", E, "token id of s_{i-1}", 1, 1e-4);
    L.add("L2.p1_var", 1, "variable index of s_{i-1}", mm, 1e-4);
    L.add("L2.p1_varsq", 1, "its square", msq, 1e-4);
    L.add("L2.p2_e", E, "token id of s_{i-2}", 1, 1e-4);
    L.add("L2.p2_var", 1, "variable index of s_{i-2}", mm, 1e-4);
    L.add("L2.p2_varsq", 1, "its square", msq, 1e-4);
    L.add("L2.d", 1, "index of the equation being written in the current step", mm + 1, 1e-4);
    L.add("L2.d_sq", 1, "d^2", (mm + 1) * (mm + 1), 1e-3);
    L.add("L2.k_sq", 1, "ncot^2", msq, 1e-3);
    L.add("L2.D_sq", 1, "(ncot + 1 + [s_i = ','])^2", (mm + 2) * (mm + 2), 1e-3);
    L.add("L2.f", 1, "'=' of an equation at or below the pivot row with a nonzero leading coefficient", 1, 1e-3);
    L.add("L2.gt1", 1, "[var(s_{i-1}) > ncot]", 1, 1e-3);
    L.add("L2.gt2", 1, "[var(s_{i-2}) > ncot]", 1, 1e-3);
    L.add("L2.klt", 1, "[ncot < nvar]", 1, 1e-3);
    L.add("L3.q", 1, "pivot row of the previous step", mm, 1e-3);
    L.add("L3.cot_num", P, "coefficient of this column in row ncot + 1 of the same step", 1, 1e-3);
    L.add("L3.q_sq", 1, "q^2", msq, 1e-2);
    L.add("L3.qr_sq", 1, "(q + [s_i = '='])^2", (mm + 1) * (mm + 1), 1e-2);
    L.add("L3.rr_sq", 1, "(d + [s_i = '='])^2", (mm + 2) * (mm + 2), 1e-2);
    L.add("L3.w", 1, "column of the next numeral, 0 for the right-hand side", mm, 1e-2);
    L.add("L3.w_sq", 1, "w^2", msq, 1e-2);
    L.add("L3.vnext", 1, "index of the next variable", mm + 1, 1e-2);
    L.add("L3.vnext_sq", 1, "vnext^2", (mm + 1) * (mm + 1), 1e-2);
    L.add("L3.f_num", 1, "the next token is a numeral", 1, 1e-2);
    L.add("L3.enext", E, "next token id unless it is a numeral", 1, 1e-2);
    L.add("L3.rk", 1, "[d = ncot]", 1, 1e-2);
    L.add("L3.rq", 1, "[d = q]", 1, 1e-2);
    L.add("L4.a", P, "pivot coefficient", 1, 1e-2);
    L.add("L4.b", P, "pivot row entry in the output column", 1, 1e-2);
    L.add("L4.c", 2 * P, "row d entry in the pivot column, and the same for row ncot", 1, 1e-2);
    L.add("L4.e", 2 * P, "row d entry in the output column, and the same for row ncot", 1, 1e-2);
    L.add("L4.lcopy", 3, "code of the next variable", msq, 1e-2);
    L.add("L4.num", P, "next numeral", 1, eps / 2);
    L.add("L4.lout", 3, "code of the next variable, zero unless one follows", msq, eps / 2);

    const std::size_t W = L.width();
    const auto V = m.vocab.size();
    m.embed = Mat::Zero(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(W));
    for (std::size_t t = 0; t < V; ++t) {
        const auto r = static_cast<Eigen::Index>(t);
        const std::size_t first_var = E - 1;
        const std::size_t col = t < first_var ? t : static_cast<std::size_t>(id.var());
        m.embed(r, static_cast<Eigen::Index>(L.col("e", col))) = 1;
        m.embed(r, static_cast<Eigen::Index>(L.col("one"))) = 1;
        if (t >= first_var) {
            const std::size_t v = t - first_var + 1;
            const auto code = var_code(v, m_max);
            for (std::size_t k = 0; k < 3; ++k) m.embed(r, static_cast<Eigen::Index>(L.col("l", k))) = code[k];
            m.embed(r, static_cast<Eigen::Index>(L.col("varsq"))) = static_cast<double>(v * v);
        }
    }

    GadgetBuilder B(m);
    const Form one = B.s("one"), pos = B.s("pos"), zero;
    auto e = [&](int k) { return B.s("e", static_cast<std::size_t>(k)); };
    auto e1 = [&](int k) { return B.s("L2.p1_e", static_cast<std::size_t>(k)); };
    Form isnum, isnum1;
    for (int v = 0; v < id.p; ++v) {
        isnum += e(v);
        isnum1 += e1(v);
    }
    const Form var = B.s("l"), varsq = B.s("varsq");
    const Form isvar = e(id.var()), iscol = e(id.var()) + e(id.comma());
    const Form sc = e(id.sep()) + e(id.comma()), sc1 = e1(id.sep()) + e1(id.comma());
    auto number_rows = [&](const std::string& slot) {
        std::vector<Form> f;
        for (std::size_t v = 0; v < P; ++v) f.push_back(B.s(slot, v));
        return f;
    };

    // L1: counts and the number of variables.
    LayerSpec L1{"L1", {}, {}, {}, {}, 0};
    B.head(L1, detail::make_head("commas", HeadKind::mean, B.rows({zero}), B.rows({zero}), B.rows({e(id.comma())}),
                                 Vec(), mean_params(1, kFracEps, kDelta, n_max), "L1.comma_frac"));
    B.head(L1, detail::make_head("seps", HeadKind::mean, B.rows({zero}), B.rows({zero}), B.rows({e(id.sep())}), Vec(),
                                 mean_params(1, kFracEps, kDelta, n_max), "L1.sep_frac"));
    B.head(L1, detail::make_head("nvar", HeadKind::copy, B.rows({one}), B.rows({isvar - one}), B.rows({var}),
                                 var.dense(W), copy_params(std::max(mm, 1.0), kCopyEps, kDelta, n_max), "L1.nvar"));
    {
        MlpBuilder mb(W);
        B.mult(mb, "neq", B.s("L1.comma_frac"), 1, pos, n, "L1.neq", kUnitMultEps);
        B.mult(mb, "ncot", B.s("L1.sep_frac"), 1, pos, n, "L1.ncot", kUnitMultEps);
        B.mult(mb, "pos_sq", pos, n, pos, n, "L1.pos_sq", kUnitMultEps);
        B.relu_sim(mb, "first", "relu", relu_net({{-1, 2}, {-1, 1}}, {1, -1}), kUnitEps, {pos, one},
                   {B.c("L1.first")}, "L1.first");
        mb.finish(L1);
    }

    // L2: position in the current step, the pivot flag, and the two previous tokens.
    LayerSpec L2{"L2", {}, {}, {}, {}, 0};
    const Form neq = B.s("L1.neq"), k = B.s("L1.ncot"), nvar = B.s("L1.nvar"), pos_sq = B.s("L1.pos_sq");
    // The first position stands in for a missing '[SEP]'; its count of ',' is 0.
    B.head(L2, detail::make_head("last_sep", HeadKind::copy, B.rows({one}),
                                 B.rows({e(id.sep()) + B.s("L1.first") - one}), B.rows({neq}), pos.dense(W),
                                 copy_params(n, kCopyEps, kDelta, n_max), "L2.neq_sep"));
    B.head(L2, detail::make_head("lead", HeadKind::copy, B.rows({one, neq, one}),
                                 B.rows({neq, -1.0 * one, isnum - one}), B.rows({e(0)}), (-1.0 * pos).dense(W),
                                 copy_params(n, kCopyEps, kDelta, n_max), "L2.first_zero"));
    {
        const Mat key = B.rows({-1.0 * one, 2 * pos, -1.0 * pos_sq});
        std::vector<Form> v1, v2;
        for (std::size_t t = 0; t < E; ++t) v1.push_back(B.s("e", t));
        v2 = v1;
        v1.push_back(var);
        v1.push_back(varsq);
        v2.push_back(var);
        v2.push_back(varsq);
        B.head(L2, detail::make_head("prev1", HeadKind::copy, B.rows({pos_sq - 2 * pos + one, pos - one, one}), key,
                                     B.rows(v1), Vec(), copy_params(msq, kCopyEps, kDelta, n_max), "L2.p1_e"));
        B.head(L2, detail::make_head("prev2", HeadKind::copy, B.rows({pos_sq - 4 * pos + 4 * one, pos - 2 * one, one}),
                                     key, B.rows(v2), Vec(), copy_params(msq, kCopyEps, kDelta, n_max), "L2.p2_e"));
    }
    {
        MlpBuilder mb(W);
        const Form r = neq - B.s("L2.neq_sep") + one;
        const Form D = k + one + e(id.comma());
        B.relu_sim(mb, "d", "linear", linear_relu_net(Mat::Ones(1, 1)), kUnitEps, {r}, {B.c("L2.d")}, "L2.d");
        B.mult(mb, "d_sq", r, mm + 2, r, mm + 2, "L2.d_sq", kUnitMultEps);
        B.mult(mb, "k_sq", k, mm + 1, k, mm + 1, "L2.k_sq", kUnitMultEps);
        B.mult(mb, "D_sq", D, mm + 2, D, mm + 2, "L2.D_sq", kUnitMultEps);
        ReluUnits u(4, one);
        u.step(0, r - k - G * (one - e(id.eq())) - G * B.s("L2.first_zero"));
        u.step(1, B.s("L2.p1_var") - k);
        u.step(2, B.s("L2.p2_var") - k);
        u.step(3, nvar - k);
        u.emit(B, mb, "flags", kUnitEps, {B.c("L2.f"), B.c("L2.gt1"), B.c("L2.gt2"), B.c("L2.klt")}, "L2.f");
        mb.finish(L2);
    }

    // L3: the previous pivot row, row ncot + 1 of each step, and the grammar of the next token.
    LayerSpec L3{"L3", {}, {}, {}, {}, 0};
    const Form d = B.s("L2.d"), d_sq = B.s("L2.d_sq"), k_sq = B.s("L2.k_sq"), f = B.s("L2.f");
    B.head(L3, detail::make_head("pivot", HeadKind::copy, B.rows({k_sq - 2 * k + one, k - one, one, one}),
                                 B.rows({-1.0 * one, 2 * k, -1.0 * k_sq, f - one}), B.rows({d}), (-1.0 * pos).dense(W),
                                 copy_params(n, kCopyEps, kDelta, n_max), "L3.q"));
    {
        const Form D = k + one + e(id.comma());
        B.head(L3, detail::make_head(
                       "cot_num", HeadKind::copy,
                       B.rows({one, k, B.s("L2.D_sq"), D, one, one, varsq, var, one}),
                       B.rows({k, -1.0 * one, -1.0 * one, 2 * d, -1.0 * d_sq, iscol - one, -1.0 * one, 2 * var, -1.0 * varsq}),
                       B.rows(number_rows("L2.p1_e")), Vec(), copy_params(1, kCopyEps, kDelta, n_max), "L3.cot_num"));
    }
    {
        MlpBuilder mb(W);
        const Form q = B.s("L3.q"), v1 = B.s("L2.p1_var"), v2 = B.s("L2.p2_var");
        const Form plus = e(id.plus()), eq = e(id.eq()), plus1 = e1(id.plus()), eq1 = e1(id.eq());
        const Form klt = B.s("L2.klt"), gt1 = B.s("L2.gt1"), gt2 = B.s("L2.gt2");
        const Form k1sq = k_sq + 2 * k + one;
        B.mult(mb, "q_sq", q, mm + 1, q, mm + 1, "L3.q_sq", kUnitMultEps);
        B.mult(mb, "qr_sq", q, mm + 1, q, mm + 1, "L3.qr_sq", kUnitMultEps);

        enum Out : std::size_t { kQr, kRr, kW, kWsq, kVn, kVnsq, kFnum, kRk, kRq, kNext };
        ReluUnits u(kNext + E, one);
        u.add(kQr, 1, 2 * q + one - G * (one - eq));
        u.add(kRr, 1, d_sq);
        u.add(kRr, -1, -1.0 * d_sq);
        u.add(kRr, 1, 2 * d + one - G * (one - eq));
        // Column of the numeral that follows: x_{k+1} after a row start, the successor of
        // max(var(s_{i-1}), k) after '+', the right-hand side after '='.
        u.add(kW, 1, k + one - G * (one - sc));
        u.add(kW, 1, k + one - G * (one - plus));
        u.add(kW, 1, v1 - k - G * (one - plus));
        u.add(kWsq, 1, k1sq - G * (one - sc));
        u.add(kWsq, 1, k1sq - G * (one - plus));
        u.add(kWsq, 1, B.s("L2.p1_varsq") + 2 * v1 + one - k1sq - G * (2 * one - plus - gt1));
        // Variable that follows: x_d at a row start, otherwise the column of the numeral at i.
        u.add(kVn, 1, d - G * (one - sc));
        u.add(kVn, 1, k + one - G * (2 * one - isnum - sc1));
        u.add(kVn, 1, k + one - G * (2 * one - isnum - plus1));
        u.add(kVn, 1, v2 - k - G * (2 * one - isnum - plus1));
        u.add(kVnsq, 1, d_sq - G * (one - sc));
        u.add(kVnsq, 1, k1sq - G * (2 * one - isnum - sc1));
        u.add(kVnsq, 1, k1sq - G * (2 * one - isnum - plus1));
        u.add(kVnsq, 1, B.s("L2.p2_varsq") + 2 * v2 + one - k1sq - G * (3 * one - isnum - plus1 - gt2));
        u.add(kFnum, 1, plus);
        u.add(kFnum, 1, eq);
        u.step(kFnum, d - k - G * (one - sc));
        u.step(kFnum, d - nvar - G * (one - sc), -1);
        u.is_zero(kRk, d - k);
        u.is_zero(kRq, d - q);
        auto next = [&](int t) { return kNext + static_cast<std::size_t>(t); };
        u.step(next(id.var()), k - d + one - G * (one - sc));
        u.add(next(id.var()), 1, isnum);
        u.add(next(id.var()), -1, isnum + eq1 - one);
        u.step(next(id.plus()), nvar - var - G * (2 * one - isvar - klt));
        u.add(next(id.eq()), 1, isvar);
        u.step(next(id.eq()), nvar - var - G * (2 * one - isvar - klt), -1);
        u.add(next(id.comma()), 1, isnum + eq1 - one);
        u.step(next(id.sep()), d - nvar - G * (2 * one - sc - klt));
        u.step(next(id.eos()), d - nvar - G * (one - sc) - G * klt);
        std::vector<long> cols{B.c("L3.qr_sq"), B.c("L3.rr_sq"), B.c("L3.w"),  B.c("L3.w_sq"), B.c("L3.vnext"),
                               B.c("L3.vnext_sq"), B.c("L3.f_num"), B.c("L3.rk"), B.c("L3.rq")};
        for (std::size_t t = 0; t < E; ++t) cols.push_back(B.c("L3.enext", t));
        u.emit(B, mb, "grammar", kUnitEps, cols, "L3.enext");
        mb.finish(L3);
    }

    // L4: copy the four coefficients of the update and the code of the next variable.
    LayerSpec L4{"L4", {}, {}, {}, {}, 0};
    {
        const Form q = B.s("L3.q"), w = B.s("L3.w"), eq = e(id.eq());
        // Positions of the previous step: -(k - 1 - ncot_j)^2.
        const std::vector<Form> qs{k_sq - 2 * k + one, k - one, one};
        const std::vector<Form> ks{-1.0 * one, 2 * k, -1.0 * k_sq};
        auto score = [&](std::vector<Form> qv, std::vector<Form> kv, const Form& row_sq, const Form& row,
                         const Form& col_sq, const Form& col, const Form& kind) {
            const std::vector<Form> qa{row_sq, row, one, col_sq, col, one, one};
            const std::vector<Form> ka{-1.0 * one, 2 * d, -1.0 * d_sq, -1.0 * one, 2 * var, -1.0 * varsq, kind - one};
            qv.insert(qv.end(), qa.begin(), qa.end());
            kv.insert(kv.end(), ka.begin(), ka.end());
            return std::pair{B.rows(qv), B.rows(kv)};
        };
        auto with_cot = [&]() {
            auto v = number_rows("L2.p1_e");
            const auto c = number_rows("L3.cot_num");
            v.insert(v.end(), c.begin(), c.end());
            return B.rows(v);
        };
        const auto prm = copy_params(1, kCopyEps, kDelta, n_max);
        auto [qa, ka] = score(qs, ks, B.s("L3.q_sq"), q, k_sq, k, isvar);
        B.head(L4, detail::make_head("pivot_k", HeadKind::copy, qa, ka, B.rows(number_rows("L2.p1_e")), Vec(), prm, "L4.a"));
        auto [qb, kb] = score(qs, ks, B.s("L3.qr_sq"), q + eq, B.s("L3.w_sq"), w, iscol);
        B.head(L4, detail::make_head("pivot_w", HeadKind::copy, qb, kb, B.rows(number_rows("L2.p1_e")), Vec(), prm, "L4.b"));
        auto [qc, kc] = score(qs, ks, d_sq, d, k_sq, k, isvar);
        B.head(L4, detail::make_head("row_k", HeadKind::copy, qc, kc, with_cot(), Vec(), prm, "L4.c"));
        auto [qe, ke] = score(qs, ks, B.s("L3.rr_sq"), d + eq, B.s("L3.w_sq"), w, iscol);
        B.head(L4, detail::make_head("row_w", HeadKind::copy, qe, ke, with_cot(), Vec(), prm, "L4.e"));
        B.head(L4, detail::make_head("next_var", HeadKind::copy, B.rows({B.s("L3.vnext_sq"), B.s("L3.vnext"), one}),
                                     B.rows({-1.0 * one, 2 * var, -1.0 * varsq}), B.rows({B.s("l", 0), B.s("l", 1), B.s("l", 2)}),
                                     Vec(), copy_params(msq, kCopyEps, kDelta, n_max), "L4.lcopy"));
    }
    {
        MlpBuilder mb(W);
        std::vector<Form> in;
        auto group = [&](const std::string& slot, std::size_t off) {
            for (std::size_t v = 0; v < P; ++v) in.push_back(B.s(slot, off + v));
        };
        auto flag = [&](const Form& x) {
            in.push_back(x);
            in.push_back(one - x);
            for (std::size_t v = 2; v < P; ++v) in.push_back(zero);
        };
        group("L4.a", 0);
        group("L4.b", 0);
        group("L4.c", 0);
        group("L4.c", P);
        group("L4.e", 0);
        group("L4.e", P);
        flag(B.s("L3.rk"));
        flag(B.s("L3.rq"));
        in.push_back(B.s("L3.f_num"));
        for (std::size_t v = 1; v < P; ++v) in.push_back(zero);
        in.push_back(one);
        B.relu_sim(mb, "coefficient", "lookup", lookup_relu_net(coefficient_table(p)), eps / 4, in,
                   detail::slot_cols(L, "L4.num"), "L4.num");
        std::vector<Form> sel{B.s("L4.lcopy", 0), B.s("L4.lcopy", 1), B.s("L4.lcopy", 2), zero, zero, zero,
                              B.s("L3.enext", static_cast<std::size_t>(id.var())) - 0.5 * one};
        B.relu_sim(mb, "lout", "select", selection_relu_net(3, msq, 0.4), eps / 4, sel, detail::slot_cols(L, "L4.lout"),
                   "L4.lout");
        mb.finish(L4);
    }
    m.layers = {std::move(L1), std::move(L2), std::move(L3), std::move(L4)};

    // Logits: numerals read L4.num, symbols read L3.enext, variables add their code times L4.lout.
    m.unembed = Mat::Zero(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(W));
    m.unembed_bias = Vec::Zero(static_cast<Eigen::Index>(V));
    for (std::size_t t = 0; t < V; ++t) {
        const auto r = static_cast<Eigen::Index>(t);
        if (t < P) {
            m.unembed(r, static_cast<Eigen::Index>(L.col("L4.num", t))) = 1;
        } else if (t < E - 1) {
            m.unembed(r, static_cast<Eigen::Index>(L.col("L3.enext", t))) = 1;
        } else {
            const std::size_t v = t - (E - 1) + 1;
            m.unembed(r, static_cast<Eigen::Index>(L.col("L3.enext", static_cast<std::size_t>(id.var())))) = 1;
            const auto code = var_code(v, m_max);
            for (std::size_t c = 0; c < 3; ++c) m.unembed(r, static_cast<Eigen::Index>(L.col("L4.lout", c))) = code[c];
        }
    }

    m.weight_bound = B.bound() + msq * msq;
    detail::finalize(m);
    return m;
}

SlotReference equation_reference(const Tokens& seq, std::int64_t p) {
    const std::size_t N = seq.size();
    SlotReference ref;
    auto slot = [&](const std::string& name) -> std::vector<std::optional<double>>& {
        auto& v = ref[name];
        v.resize(N);
        return v;
    };
    auto is_num = [&](std::size_t i) { return i < N && !seq[i].empty() && std::isdigit(static_cast<unsigned char>(seq[i][0])); };
    auto var_of = [&](std::size_t i) -> double {
        return i < N && seq[i].size() > 1 && seq[i][0] == 'x' ? std::stod(seq[i].substr(1)) : 0;
    };
    (void)p;
    double m = 0;
    for (std::size_t i = 0; i < N && seq[i] != kSep; ++i) m = std::max(m, var_of(i));

    std::vector<double> neq(N), ncot(N), d(N), f(N, 0);
    double c = 0, s = 0, c_at_sep = 0, lead = -1, maxvar = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (seq[i] == ",") ++c;
        if (seq[i] == kSep) {
            ++s;
            c_at_sep = c;
        }
        neq[i] = c;
        ncot[i] = s;
        d[i] = c - c_at_sep + 1;
        maxvar = std::max(maxvar, var_of(i));
        if (seq[i] == "," || seq[i] == kSep) lead = -1;
        if (is_num(i) && lead < 0) lead = std::stod(seq[i]);
        if (seq[i] == "=") f[i] = d[i] > ncot[i] && lead > 0 ? 1 : 0;
        slot("L1.neq")[i] = neq[i];
        slot("L1.ncot")[i] = ncot[i];
        if (neq[i] >= 1) slot("L1.nvar")[i] = maxvar;
        slot("L2.d")[i] = d[i];
        slot("L2.d_sq")[i] = d[i] * d[i];
        slot("L2.k_sq")[i] = ncot[i] * ncot[i];
        slot("L2.f")[i] = f[i];
        if (neq[i] >= 1) slot("L2.klt")[i] = ncot[i] < m ? 1 : 0;
    }
    // Pivot row of each step: the first flagged equation.
    std::vector<double> pivot(static_cast<std::size_t>(s) + 1, 0);
    for (std::size_t i = N; i-- > 0;)
        if (f[i] > 0) pivot[static_cast<std::size_t>(ncot[i])] = d[i];
    for (std::size_t i = 0; i + 1 < N; ++i) {
        if (ncot[i] < 1) continue;
        const double q = pivot[static_cast<std::size_t>(ncot[i]) - 1];
        slot("L3.q")[i] = q;
        const bool num_next = is_num(i + 1);
        slot("L3.f_num")[i] = num_next ? 1 : 0;
        if (var_of(i + 1) > 0) slot("L3.vnext")[i] = var_of(i + 1);
        if (num_next) {
            slot("L3.w")[i] = seq[i] == "=" ? 0 : var_of(i + 2);
            slot("L3.rk")[i] = d[i] == ncot[i] ? 1 : 0;
            slot("L3.rq")[i] = d[i] == q ? 1 : 0;
        }
    }
    return ref;
}

}  // namespace cotlab
