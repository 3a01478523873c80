#include <cmath>

#include "cotlab/arith.hpp"
#include "cotlab/field.hpp"
#include "cotlab/model.hpp"
#include "model_build.hpp"

namespace cotlab {

using detail::Form;
using detail::GadgetBuilder;
using detail::MlpBuilder;
using detail::relu_net;

namespace {

// Multiplications run on inputs rescaled into [-1, 1]; the proof's lambda for M = 1
// keeps both the truncation and the double rounding far below the slot tolerances.
constexpr double kUnitMultEps = 2e-5;
constexpr double kFracEps = 1e-9;
constexpr double kCopyEps = 1e-6;
constexpr double kSegMeanEps = 1e-3;
constexpr double kPeqSelectEps = 1e-5;
constexpr double kLinearEps = 1e-6;
constexpr double kIndicatorEps = 1e-6;
constexpr double kLookupEps = 1e-5;
constexpr double kBranchEps = 1e-4;
// Scores are integers in exact arithmetic; half the gap leaves room for stream noise.
constexpr double kDelta = 0.5;


struct Symbols {
    int p;
    int num(std::int64_t v) const { return static_cast<int>(v); }
    int plus() const { return p; }
    int minus() const { return p + 1; }
    int times() const { return p + 2; }
    int divide() const { return p + 3; }
    int lparen() const { return p + 4; }
    int rparen() const { return p + 5; }
    int equals() const { return p + 6; }
    int eos() const { return p + 7; }
    int size() const { return p + 8; }
};

std::int64_t apply(int op, const Symbols& sy, std::int64_t a, std::int64_t b) {
    const FieldElement x(a, sy.p), y(b, sy.p);
    if (op == sy.plus()) return (x + y).value();
    if (op == sy.minus()) return (x - y).value();
    if (op == sy.times()) return (x * y).value();
    return (x / y).value();
}

// Output layout of the L3 table: f, u, outcome (p entries), nred.
LookupTable reduction_table(const Symbols& sy) {
    const auto V = static_cast<std::size_t>(sy.size());
    LookupTable t{7, V, static_cast<std::size_t>(sy.p) + 3, {}};
    auto value = [&](bool f, bool u, std::int64_t outcome, double nred) {
        Vec v = Vec::Zero(static_cast<Eigen::Index>(t.out));
        if (f) {
            v(0) = 1;
            v(2 + outcome) = 1;
            v(static_cast<Eigen::Index>(t.out) - 1) = nred;
        }
        if (u) v(1) = 1;
        return v;
    };
    const int ops[] = {sy.plus(), sy.minus(), sy.times(), sy.divide()};
    const int lefts[] = {sy.lparen(), sy.plus(), sy.minus(), sy.times(), sy.divide(), sy.equals()};
    for (int si : lefts) {
        for (int op : ops) {
            const bool additive = op == sy.plus() || op == sy.minus();
            const bool left_mul = si == sy.times() || si == sy.divide();
            if (additive ? !(si == sy.lparen() || si == sy.equals()) : left_mul) continue;
            std::vector<int> rights;
            if (additive) {
                rights = {sy.plus(), sy.minus(), sy.rparen(), sy.equals()};
            } else if (si == sy.lparen()) {
                rights = {sy.plus(), sy.minus(), sy.times(), sy.divide(), sy.equals()};
            } else {
                rights = {-1};
            }
            for (int s2 : rights) {
                if (si == sy.lparen() && s2 == sy.rparen()) continue;  // handled by the bracket entries
                for (int a = 0; a < sy.p; ++a) {
                    for (int b = 0; b < sy.p; ++b) {
                        if (op == sy.divide() && b == 0) continue;
                        t.entries.push_back({{si, a, op, b, s2, -1, 0},
                                             value(true, si == sy.equals(), apply(op, sy, a, b), 3)});
                    }
                }
            }
        }
    }
    for (int op : ops) {
        for (int a = 0; a < sy.p; ++a) {
            for (int b = 0; b < sy.p; ++b) {
                if (op == sy.divide() && b == 0) continue;
                t.entries.push_back({{-1, sy.lparen(), a, op, b, sy.rparen(), 0}, value(true, false, apply(op, sy, a, b), 5)});
                t.entries.push_back({{sy.equals(), sy.lparen(), a, op, b, sy.rparen(), 0}, value(false, true, 0, 0)});
            }
        }
    }
    return t;
}

}  // namespace

std::size_t arithmetic_trace_bound(std::size_t ops) {
    // k operators take at most 4k + 1 tokens and each step removes one operator.
    return 2 * (ops + 1) * (ops + 1) + 1;
}

ModelSpec build_arithmetic_model(std::size_t n_max, std::int64_t p, double eps) {
    if (!is_prime(p)) throw NotPrime("modulus " + std::to_string(p) + " is not prime");
    if (n_max < 4) throw DimensionMismatch("n_max must be at least 4");
    if (!(eps > 0 && eps < 0.5)) throw AssumptionViolated("end-to-end eps must lie in (0, 0.5)");
    const Symbols sy{static_cast<int>(p)};
    const auto V = static_cast<std::size_t>(sy.size());
    const double n = static_cast<double>(n_max);

    ModelSpec m;
    m.task = Task::arithmetic;
    m.p = p;
    m.n_max = n_max;
    m.eps = eps;
    for (int v = 0; v < sy.p; ++v) m.vocab.push_back(std::to_string(v));
    for (const char* t : {"+", "−", "×", "÷", "(", ")", "="}) m.vocab.emplace_back(t);
    m.vocab.emplace_back(kEos);

    SlotLayout& L = m.layout;
    L.add("tok", V, "one-hot token", 1);
    L.add("pos", 1, "position i, 1-based", n);
    L.add("one", 1, "constant 1", 1);
    L.add("L1.eq_frac", 1, "fraction of '=' among tokens 1..i", 1, 1e-9);
    L.add("L1.eq_last", 1, "position of the last '=' (meaningful once one exists)", n, 1e-6);
    L.add("L1.neq", 1, "number of '=' up to i", n, 1e-6);
    L.add("L1.pos_sq", 1, "i^2", n * n, 1e-5);
    L.add("L1.peq", 1, "position of the last '=', 0 if none", n, 1e-5);
    L.add("L1.first", 1, "[i = 1]", 1, 1e-5);
    L.add("L2.nhat", 1, "n of the previous token", n, 1e-5);
    L.add("L2.dhat_raw", 1, "d of the previous token plus 1, uncorrected at i = 1", n + 1, 1e-5);
    L.add("L2.d", 1, "i minus the position of the last '='", n, 1e-4);
    L.add("L2.dhat", 1, "d of the previous token plus 1", n, 1e-4);
    L.add("L2.in_cot", 1, "[at least one '=' so far]", 1, 1e-4);
    L.add("L2.neq_sq", 1, "n^2", n * n, 1e-4);
    L.add("L2.nhat_sq", 1, "nhat^2", n * n, 1e-4);
    L.add("L2.d_sq", 1, "d^2", n * n, 1e-3);
    L.add("L2.dhat_sq", 1, "dhat^2", n * n, 1e-3);
    for (int t = 1; t <= 5; ++t)
        L.add("L3.copy" + std::to_string(t), V, "token at offset d+" + std::to_string(t) + " of the previous segment", 1, 1e-3);
    L.add("L3.f", 1, "the next token starts the reduced handle", 1, 1e-3);
    L.add("L3.u", 1, "f at an '=' position", 1, 1e-3);
    L.add("L3.outcome", static_cast<std::size_t>(p), "one-hot value of the handle", 1, 1e-3);
    L.add("L3.nred", 1, "tokens consumed by the handle", 5, 1e-3);
    L.add("L4.fmean", 1, "mean of f over the current segment", 1, kSegMeanEps);
    L.add("L4.nred_hat", 1, "nred at the leftmost f = 1 of the segment, 0 before it", 5, 1e-3);
    L.add("L4.fhat", 1, "number of f = 1 positions in the segment up to i", n, 0.15);
    L.add("L4.eout", V, "outcome if f = 1, else the next copied token", 1, 1e-3);
    L.add("L4.dr_sq", 1, "(d + nred_hat)^2; the offset never passes the previous segment", n * n, 1e-2);
    L.add("L5.copy", V, "token at offset d + nred_hat of the previous segment", 1, 1e-3);
    L.add("L5.out", V, "next-token one-hot", 1, eps / 2);
    L.add("L5.eos", 1, "[d = 1]", 1, eps / 2);

    const std::size_t W = L.width();
    m.embed = Mat::Zero(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(W));
    for (std::size_t k = 0; k < V; ++k) {
        m.embed(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(L.col("tok", k))) = 1;
        m.embed(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(L.col("one"))) = 1;
    }

    GadgetBuilder B(m);
    const Form one = B.s("one"), pos = B.s("pos");
    auto tok = [&](int k) { return B.s("tok", static_cast<std::size_t>(k)); };
    const Form zero;
    Mat tokV = Mat::Zero(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(W));
    for (std::size_t k = 0; k < V; ++k) tokV(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(L.col("tok", k))) = 1;

    // L1: count '=' and locate the last one.
    LayerSpec L1{"L1", {}, {}, {}, {}, 0};
    B.head(L1, detail::make_head("eq_frac", HeadKind::mean, B.rows({zero}), B.rows({zero}), B.rows({tok(sy.equals())}),
                                 Vec(), mean_params(1, kFracEps, kDelta, n_max), "L1.eq_frac"));
    B.head(L1, detail::make_head("eq_last", HeadKind::copy, B.rows({one}), B.rows({tok(sy.equals()) - one}),
                                 B.rows({pos}), pos.dense(W), copy_params(n, kCopyEps, kDelta, n_max), "L1.eq_last"));
    {
        MlpBuilder mb(W);
        B.mult(mb, "neq", B.s("L1.eq_frac"), 1, pos, n, "L1.neq", kUnitMultEps);
        B.mult(mb, "pos_sq", pos, n, pos, n, "L1.pos_sq", kUnitMultEps);
        const double alpha = 1 / (2 * n);
        const Mlp sel = build_selection_mlp(1, n, alpha, kPeqSelectEps);
        mb.add("peq", "select", sel, {B.s("L1.eq_last"), zero, B.s("L1.eq_frac") - alpha * one}, {B.c("L1.peq")},
               "L1.peq");
        B.note_weight(sel.W1.cwiseAbs().maxCoeff() * (1 + alpha) + sel.W2.cwiseAbs().maxCoeff());
        B.relu_sim(mb, "first", "relu", relu_net({{-1, 2}, {-1, 1}}, {1, -1}), kIndicatorEps, {pos, one},
                   {B.c("L1.first")}, "L1.first");
        mb.finish(L1);
    }

    // L2: previous-token copy, distances and squares.
    LayerSpec L2{"L2", {}, {}, {}, {}, 0};
    const Form peq = B.s("L1.peq"), neq = B.s("L1.neq");
    B.head(L2, detail::make_head("prev", HeadKind::copy, B.rows({B.s("L1.pos_sq") - 2 * pos + one, pos - one, one}),
                                 B.rows({-1.0 * one, 2 * pos, -1.0 * B.s("L1.pos_sq")}),
                                 B.rows({neq, pos - peq + one}), Vec(), copy_params(n + 1, kCopyEps, kDelta, n_max),
                                 "L2.nhat"));
    {
        MlpBuilder mb(W);
        const Form d = pos - peq, dhat = B.s("L2.dhat_raw") - B.s("L1.first");
        B.relu_sim(mb, "d", "linear", linear_relu_net(Mat::Ones(1, 1)), kLinearEps, {d}, {B.c("L2.d")}, "L2.d");
        B.relu_sim(mb, "dhat", "linear", linear_relu_net(Mat::Ones(1, 1)), kLinearEps, {dhat}, {B.c("L2.dhat")},
                   "L2.dhat");
        B.relu_sim(mb, "in_cot", "relu", relu_net({{1, 0}, {1, -1}}, {1, -1}), kIndicatorEps, {neq, one},
                   {B.c("L2.in_cot")}, "L2.in_cot");
        B.mult(mb, "neq_sq", neq, n, neq, n, "L2.neq_sq", kUnitMultEps);
        B.mult(mb, "nhat_sq", B.s("L2.nhat"), n, B.s("L2.nhat"), n, "L2.nhat_sq", kUnitMultEps);
        B.mult(mb, "d_sq", d, n, d, n, "L2.d_sq", kUnitMultEps);
        B.mult(mb, "dhat_sq", dhat, n + 1, dhat, n + 1, "L2.dhat_sq", kUnitMultEps);
        mb.finish(L2);
    }

    // L3: read the next five tokens of the previous segment and look the handle up.
    LayerSpec L3{"L3", {}, {}, {}, {}, 0};
    const Form d = B.s("L2.d"), nhat = B.s("L2.nhat"), dhat = B.s("L2.dhat");
    const Form neq_sq = B.s("L2.neq_sq");
    const Mat prev_key = B.rows({-1.0 * one, -1.0 * B.s("L2.nhat_sq"), 2 * nhat, -1.0 * one, -1.0 * B.s("L2.dhat_sq"), 2 * dhat});
    for (int t = 1; t <= 5; ++t) {
        const double tt = t;
        const Mat Q = B.rows({neq_sq - 2 * neq + one, one, neq - one, B.s("L2.d_sq") + 2 * tt * d + tt * tt * one, one,
                              d + tt * one});
        B.head(L3, detail::make_head("copy" + std::to_string(t), HeadKind::copy, Q, prev_key, tokV, Vec(),
                                     copy_params(1, kCopyEps, kDelta, n_max), "L3.copy" + std::to_string(t)));
    }
    {
        MlpBuilder mb(W);
        const LookupTable table = reduction_table(sy);
        std::vector<Form> in;
        for (std::size_t k = 0; k < V; ++k) in.push_back(B.s("tok", k));
        for (int t = 1; t <= 5; ++t)
            for (std::size_t k = 0; k < V; ++k) in.push_back(B.s("L3.copy" + std::to_string(t), k));
        for (std::size_t k = 0; k < V; ++k) in.push_back(k == 0 ? B.s("L2.in_cot") : zero);
        in.push_back(one);
        std::vector<long> out{B.c("L3.f"), B.c("L3.u")};
        for (std::size_t k = 0; k < static_cast<std::size_t>(p); ++k) out.push_back(B.c("L3.outcome", k));
        out.push_back(B.c("L3.nred"));
        B.relu_sim(mb, "lookup", "lookup", lookup_relu_net(table), kLookupEps, in, out, "L3.f");
        mb.finish(L3);
    }

    // L4: segment count of f, the leftmost handle, and the first-branch selection.
    LayerSpec L4{"L4", {}, {}, {}, {}, 0};
    B.head(L4, detail::make_head("fmean", HeadKind::mean, B.rows({one, neq_sq, 2 * neq}), B.rows({-1.0 * neq_sq, -1.0 * one, neq}),
                                 B.rows({B.s("L3.f")}), Vec(), mean_params(1, kSegMeanEps, kDelta, n_max), "L4.fmean"));
    {
        // The segment's own '=' is a fallback with the lowest priority unless the handle starts there.
        const Form g = B.s("L3.f") + tok(sy.equals()) - B.s("L3.u");
        const Form r = -1.0 * pos - n * tok(sy.equals()) + n * B.s("L3.u");
        B.head(L4, detail::make_head("leftmost", HeadKind::copy, B.rows({one, neq_sq, 2 * neq, one, one}),
                                     B.rows({-1.0 * neq_sq, -1.0 * one, neq, g, -1.0 * one}), B.rows({B.s("L3.nred")}),
                                     r.dense(W), copy_params(2 * n, kCopyEps, kDelta, n_max), "L4.nred_hat"));
    }
    {
        MlpBuilder mb(W);
        B.mult(mb, "fhat", B.s("L4.fmean"), 1, d + one, n + 1, "L4.fhat", kUnitMultEps);
        std::vector<Form> in;
        for (std::size_t k = 0; k < V; ++k) in.push_back(k < static_cast<std::size_t>(p) ? B.s("L3.outcome", k) : zero);
        for (std::size_t k = 0; k < V; ++k) in.push_back(B.s("L3.copy1", k));
        in.push_back(B.s("L3.f") - 0.5 * one);
        B.relu_sim(mb, "eout", "select", selection_relu_net(V, 1, 0.4), kBranchEps, in, detail::slot_cols(L, "L4.eout"),
                   "L4.eout");
        const Form dr = d + B.s("L4.nred_hat");
        B.mult(mb, "dr_sq", dr, n + 5, dr, n + 5, "L4.dr_sq", kUnitMultEps);
        mb.finish(L4);
    }

    // L5: copy past the reduced handle, choose the branch, flag the answer.
    LayerSpec L5{"L5", {}, {}, {}, {}, 0};
    B.head(L5, detail::make_head("after", HeadKind::copy,
                                 B.rows({neq_sq - 2 * neq + one, one, neq - one, B.s("L4.dr_sq"), one, d + B.s("L4.nred_hat")}),
                                 prev_key, tokV, Vec(), copy_params(1, kCopyEps, kDelta, n_max), "L5.copy"));
    {
        MlpBuilder mb(W);
        std::vector<Form> in;
        for (std::size_t k = 0; k < V; ++k) in.push_back(B.s("L5.copy", k));
        for (std::size_t k = 0; k < V; ++k) in.push_back(B.s("L4.eout", k));
        in.push_back(B.s("L4.fhat") - B.s("L3.f") - 0.5 * one);
        B.relu_sim(mb, "out", "select", selection_relu_net(V, 1, 0.3), eps / 2, in, detail::slot_cols(L, "L5.out"),
                   "L5.out");
        B.relu_sim(mb, "eos", "relu", relu_net({{1, 0}, {1, -1}, {1, -2}}, {1, -2, 1}), eps / 2, {d, one},
                   {B.c("L5.eos")}, "L5.eos");
        mb.finish(L5);
    }
    m.layers = {std::move(L1), std::move(L2), std::move(L3), std::move(L4), std::move(L5)};

    // Logits read the selected token; '<eos>' overtakes '=' when the segment is one numeral.
    m.unembed = Mat::Zero(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(W));
    m.unembed_bias = Vec::Zero(static_cast<Eigen::Index>(V));
    for (std::size_t k = 0; k < V; ++k)
        m.unembed(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(L.col("L5.out", k))) = 1;
    const auto eq = static_cast<Eigen::Index>(sy.equals()), eos = static_cast<Eigen::Index>(sy.eos());
    m.unembed(eq, static_cast<Eigen::Index>(L.col("L5.eos"))) = -1;
    m.unembed.row(eos).setZero();
    m.unembed(eos, static_cast<Eigen::Index>(L.col("L5.out", static_cast<std::size_t>(sy.equals())))) = 1;
    m.unembed(eos, static_cast<Eigen::Index>(L.col("L5.eos"))) = 1;
    m.unembed_bias(eos) = -1;

    m.weight_bound += B.bound() + 1;
    detail::finalize(m);
    return m;
}

SlotReference arithmetic_reference(const Tokens& seq, std::int64_t p) {
    const std::size_t N = seq.size();
    SlotReference ref;
    auto slot = [&](const std::string& name) -> std::vector<std::optional<double>>& {
        auto& v = ref[name];
        v.resize(N);
        return v;
    };
    std::vector<double> n(N), pe(N), d(N);
    std::vector<std::size_t> eqs;
    double cnt = 0, last = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (seq[i] == "=") {
            ++cnt;
            last = static_cast<double>(i + 1);
            eqs.push_back(i);
        }
        n[i] = cnt;
        pe[i] = last;
        d[i] = static_cast<double>(i + 1) - last;
    }
    for (std::size_t i = 0; i < N; ++i) {
        const double pos = static_cast<double>(i + 1);
        slot("pos")[i] = pos;
        slot("L1.eq_frac")[i] = n[i] / pos;
        if (n[i] > 0) slot("L1.eq_last")[i] = pe[i];
        slot("L1.neq")[i] = n[i];
        slot("L1.pos_sq")[i] = pos * pos;
        slot("L1.peq")[i] = pe[i];
        slot("L1.first")[i] = i == 0 ? 1 : 0;
        if (i > 0) {
            slot("L2.nhat")[i] = n[i - 1];
            slot("L2.dhat_raw")[i] = d[i - 1] + 1;
            slot("L2.nhat_sq")[i] = n[i - 1] * n[i - 1];
        }
        const double dh = i > 0 ? d[i - 1] + 1 : 1;
        slot("L2.dhat")[i] = dh;
        slot("L2.dhat_sq")[i] = dh * dh;
        slot("L2.d")[i] = d[i];
        slot("L2.d_sq")[i] = d[i] * d[i];
        slot("L2.in_cot")[i] = n[i] >= 1 ? 1 : 0;
        slot("L2.neq_sq")[i] = n[i] * n[i];
        slot("L5.eos")[i] = d[i] == 1 ? 1 : 0;
        if (n[i] == 0) {
            slot("L3.f")[i] = 0;
            slot("L3.u")[i] = 0;
            slot("L3.nred")[i] = 0;
            slot("L4.nred_hat")[i] = 0;
            slot("L4.fmean")[i] = 0;
            slot("L4.fhat")[i] = 0;
        }
    }
    // Per segment: where the previous expression's leftmost handle fires.
    for (std::size_t k = 0; k < eqs.size(); ++k) {
        const std::size_t begin = k == 0 ? 0 : eqs[k - 1] + 1;
        const Tokens prev(seq.begin() + static_cast<long>(begin), seq.begin() + static_cast<long>(eqs[k]));
        std::size_t fire = 0, nred = 0;
        try {
            const Expr e = parse_tokens(prev, p);
            const auto hs = find_handles(e);
            if (hs.empty()) continue;
            const std::size_t s = hs.front().start;
            const auto& t = e.tokens;
            const bool bracket = s > 0 && s + 3 < t.size() && t[s - 1].kind == TokKind::lparen &&
                                 t[s + 3].kind == TokKind::rparen;
            fire = bracket ? s - 1 : s;
            nred = bracket ? 5 : 3;
        } catch (const Error&) {
            continue;
        }
        const std::size_t end = k + 1 < eqs.size() ? eqs[k + 1] : N;
        for (std::size_t i = eqs[k]; i < end; ++i) {
            const auto dd = static_cast<std::size_t>(d[i]);
            if (dd <= fire) {
                slot("L3.f")[i] = dd == fire ? 1 : 0;
                slot("L3.u")[i] = dd == fire && dd == 0 ? 1 : 0;
                slot("L3.nred")[i] = dd == fire ? static_cast<double>(nred) : 0;
                slot("L4.fhat")[i] = dd == fire ? 1 : 0;
                slot("L4.fmean")[i] = dd == fire ? 1 / (d[i] + 1) : 0;
            }
            const double nh = dd >= fire ? static_cast<double>(nred) : 0;
            slot("L4.nred_hat")[i] = nh;
            slot("L4.dr_sq")[i] = (d[i] + nh) * (d[i] + nh);
        }
    }
    return ref;
}

}  // namespace cotlab
