#include "cotlab/certify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "cotlab/gadgets.hpp"
#include "cotlab/rng.hpp"

namespace cotlab {

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.unit(); }

LemmaCheck finish(std::string name, std::string what, double measured, double tol, std::size_t samples,
                  std::string note = {}) {
    LemmaCheck c;
    c.name = std::move(name);
    c.what = std::move(what);
    c.measured = measured;
    c.tolerance = tol;
    c.samples = samples;
    c.pass = measured <= tol;
    c.note = std::move(note);
    return c;
}

LemmaCheck check_mult(double eps) {
    const double M = 5;
    const Mlp f = build_mult_mlp(M, eps);
    double worst = 0;
    std::size_t n = 0;
    Vec x(2);
    for (int a = 0; a <= 200; ++a) {
        for (int b = 0; b <= 200; ++b) {
            x << -M + 0.05 * a, -M + 0.05 * b;
            worst = std::max(worst, std::abs(f(x)(0) - x(0) * x(1)));
            ++n;
        }
    }
    return finish("mult", "product of two scalars in [-5, 5], 0.05 grid", worst, eps, n,
                  fmt::format("lambda={:.6g}", f.lambda));
}

ReluNet random_relu_net(Rng& rng, std::size_t in, std::size_t hidden, std::size_t out) {
    ReluNet g;
    g.W1 = Mat::Zero(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(in));
    g.W2 = Mat::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(hidden));
    for (Eigen::Index r = 0; r < g.W1.rows(); ++r)
        for (Eigen::Index c = 0; c < g.W1.cols(); ++c) g.W1(r, c) = static_cast<double>(rng.range(-3, 3));
    for (Eigen::Index r = 0; r < g.W2.rows(); ++r)
        for (Eigen::Index c = 0; c < g.W2.cols(); ++c) g.W2(r, c) = static_cast<double>(rng.range(-3, 3));
    return g;
}

LemmaCheck check_relu_sim(double eps, Rng& rng, std::size_t trials) {
    double worst = 0;
    std::size_t n = 0;
    for (int net = 0; net < 8; ++net) {
        const std::size_t in = 1 + rng.below(4), hidden = 2 + rng.below(15), out = 1 + rng.below(3);
        const ReluNet g = random_relu_net(rng, in, hidden, out);
        const Mlp f = build_relu_sim(g, eps);
        for (std::size_t t = 0; t < trials; ++t) {
            Vec x(static_cast<Eigen::Index>(in));
            for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = uniform(rng, -10, 10);
            worst = std::max(worst, (f(x) - g(x)).cwiseAbs().maxCoeff());
            ++n;
        }
    }
    return finish("relu_sim", "GeLU simulation of 8 random integer ReLU nets on [-10, 10]^d", worst, eps, n);
}

LemmaCheck check_linear(double eps, Rng& rng, std::size_t trials) {
    Mat W(3, 4);
    for (Eigen::Index r = 0; r < W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = static_cast<double>(rng.range(-4, 4));
    const Mlp f = build_linear_mlp(W, eps);
    double worst = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        Vec x(4);
        for (Eigen::Index k = 0; k < 4; ++k) x(k) = uniform(rng, -20, 20);
        worst = std::max(worst, (f(x) - W * x).cwiseAbs().maxCoeff());
    }
    return finish("linear", "linear map with integer weights on [-20, 20]^4", worst, eps, trials);
}

LemmaCheck check_selection(double eps, Rng& rng, std::size_t trials) {
    const double M = 10, alpha = 0.5;
    const std::size_t d = 3;
    const Mlp f = build_selection_mlp(d, M, alpha, eps);
    double worst_x = 0, worst_y = 0;
    for (std::size_t t = 0; t < 2 * trials; ++t) {
        Vec in(static_cast<Eigen::Index>(2 * d + 1));
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(2 * d); ++k) in(k) = uniform(rng, -M, M);
        const bool pick_x = t % 2 == 0;
        const double mag = alpha + uniform(rng, 0, 5);
        in(static_cast<Eigen::Index>(2 * d)) = pick_x ? mag : -mag;
        const Vec want = pick_x ? Vec(in.head(static_cast<Eigen::Index>(d)))
                                : Vec(in.segment(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
        const double err = (f(in) - want).cwiseAbs().maxCoeff();
        (pick_x ? worst_x : worst_y) = std::max(pick_x ? worst_x : worst_y, err);
    }
    auto c = finish("selection", "select x for t >= 0.5 and y for t <= -0.5, |x|,|y| <= 10", std::max(worst_x, worst_y),
                    eps, 2 * trials, fmt::format("x-branch={:.3g} y-branch={:.3g}", worst_x, worst_y));
    return c;
}

LemmaCheck check_lookup(double eps) {
    struct Case {
        std::size_t k, d;
        std::function<std::size_t(const std::vector<std::size_t>&)> g;
    };
    const std::vector<Case> cases = {
        {2, 5, [](const std::vector<std::size_t>& v) { return v[0] * v[1] % 5; }},
        {2, 7, [](const std::vector<std::size_t>& v) { return (v[0] + v[1]) % 7; }},
        {2, 11, [](const std::vector<std::size_t>& v) { return v[0] * v[1] % 11; }},
        {3, 5, [](const std::vector<std::size_t>& v) { return (v[0] + v[1] * v[2]) % 5; }},
    };
    double worst = 0;
    std::size_t n = 0, wrong = 0;
    for (const auto& c : cases) {
        const LookupTable t = one_hot_table(c.k, c.d, c.g);
        const Mlp f = build_lookup_mlp(t, eps);
        for (const auto& e : t.entries) {
            Vec x = Vec::Zero(static_cast<Eigen::Index>(c.k * c.d + 1));
            for (std::size_t g = 0; g < c.k; ++g) x(static_cast<Eigen::Index>(g * c.d + static_cast<std::size_t>(e.key[g]))) = 1;
            x(static_cast<Eigen::Index>(c.k * c.d)) = 1;
            const Vec out = f(x);
            Eigen::Index got = 0, want = 0;
            out.maxCoeff(&got);
            e.value.maxCoeff(&want);
            if (got != want) ++wrong;
            worst = std::max(worst, (out - e.value).cwiseAbs().maxCoeff());
            ++n;
        }
    }
    auto c = finish("lookup", "Z_5/Z_7/Z_11 binary tables and a ternary Z_5 table", worst, eps, n,
                    fmt::format("argmax errors={}", wrong));
    c.pass = c.pass && wrong == 0;
    return c;
}

// Stream columns: symbol s, s^2, position, value, constant one.
constexpr Eigen::Index kS = 0, kS2 = 1, kPos = 2, kVal = 3, kOne = 4, kW = 5;

struct HeadCheckResult {
    double copy_err = 0;
    double mean_err = 0;
    std::size_t assumption_failures = 0;
    double copy_lambda = 0, copy_mu = 0, mean_lambda = 0;
};

HeadCheckResult check_heads(double eps, Rng& rng, std::size_t trials, std::size_t n) {
    // q_i.k_j = -(s_i - s_j)^2, so matching sets are tokens with the same symbol.
    Mat Q = Mat::Zero(3, kW), K = Mat::Zero(3, kW);
    Q(0, kOne) = 1;
    K(0, kS2) = -1;
    Q(1, kS) = 2;
    K(1, kS) = 1;
    Q(2, kS2) = 1;
    K(2, kOne) = -1;
    Mat V = Mat::Zero(1, kW);
    V(0, kVal) = 1;
    Vec R = Vec::Zero(kW);
    R(kPos) = -1;
    const double delta = 1;
    const GadgetParams cp = copy_params(static_cast<double>(n), eps, delta, n);
    const GadgetParams mp = mean_params(1, eps, delta, n);
    const HeadWeights copy = build_copy_head(Q, K, V, R, cp);
    const HeadWeights mean = build_mean_head(Q, K, V, mp);
    HeadCheckResult res;
    res.copy_lambda = copy.lambda;
    res.copy_mu = copy.mu;
    res.mean_lambda = mean.lambda;
    for (std::size_t t = 0; t < trials; ++t) {
        Mat X = Mat::Zero(static_cast<Eigen::Index>(n), kW);
        for (std::size_t j = 0; j < n; ++j) {
            const auto r = static_cast<Eigen::Index>(j);
            const auto s = static_cast<double>(rng.below(5));
            X(r, kS) = s;
            X(r, kS2) = s * s;
            X(r, kPos) = static_cast<double>(j + 1);
            X(r, kVal) = rng.unit();
            X(r, kOne) = 1;
        }
        if (!check_attention_assumption(X, Q, K, R, cp.rho, delta).ok) ++res.assumption_failures;
        if (!check_attention_assumption(X, Q, K, Vec(), mp.rho, delta).ok) ++res.assumption_failures;
        const Mat oc = attention_forward(copy, X);
        const Mat om = attention_forward(mean, X);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ri = static_cast<Eigen::Index>(i);
            double sum = 0, first = 0;
            int cnt = 0;
            for (std::size_t j = 0; j <= i; ++j) {
                if (X(static_cast<Eigen::Index>(j), kS) == X(ri, kS)) {
                    if (cnt == 0) first = X(static_cast<Eigen::Index>(j), kVal);
                    sum += X(static_cast<Eigen::Index>(j), kVal);
                    ++cnt;
                }
            }
            // Priority -j makes the earliest matching token the copy target.
            res.copy_err = std::max(res.copy_err, std::abs(oc(ri, 0) - first));
            res.mean_err = std::max(res.mean_err, std::abs(om(ri, 0) - sum / cnt));
        }
    }
    return res;
}

}  // namespace

bool LemmaReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const LemmaCheck& c) { return c.pass; });
}

std::string LemmaReport::to_text() const {
    std::ostringstream o;
    for (const auto& c : checks) {
        o << fmt::format("{:<10} {}  max_err={:.3e} tol={:.1e} samples={}", c.name, c.pass ? "ok  " : "FAIL", c.measured,
                         c.tolerance, c.samples);
        if (!c.note.empty()) o << "  " << c.note;
        o << "\n    " << c.what << "\n";
    }
    o << fmt::format("elapsed {:.2f}s\n", seconds);
    return o.str();
}

LemmaReport certify_lemmas(const LemmaOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(opt.seed);
    LemmaReport rep;
    rep.checks.push_back(check_mult(opt.eps));
    rep.checks.push_back(check_relu_sim(opt.eps, rng, opt.trials));
    rep.checks.push_back(check_linear(opt.eps, rng, opt.trials));
    rep.checks.push_back(check_selection(opt.eps, rng, opt.trials));
    rep.checks.push_back(check_lookup(opt.eps));
    const HeadCheckResult h = check_heads(opt.eps, rng, opt.trials, opt.seq_len);
    const std::size_t positions = opt.trials * opt.seq_len;
    auto copy = finish("copy", fmt::format("COPY of the earliest equal-symbol token, {}-token sequences", opt.seq_len),
                       h.copy_err, opt.eps, positions,
                       fmt::format("lambda={:.6g} mu={:.6g} gap violations={}", h.copy_lambda, h.copy_mu,
                                   h.assumption_failures));
    auto mean = finish("mean", fmt::format("MEAN over equal-symbol tokens, {}-token sequences", opt.seq_len), h.mean_err,
                       opt.eps, positions, fmt::format("lambda={:.6g}", h.mean_lambda));
    copy.pass = copy.pass && h.assumption_failures == 0;
    mean.pass = mean.pass && h.assumption_failures == 0;
    rep.checks.push_back(copy);
    rep.checks.push_back(mean);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace cotlab
