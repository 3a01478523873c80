#include "cotlab/gadgets.hpp"

#include <cmath>
#include <numbers>

namespace cotlab {

namespace {

const double kSqrt2Pi = std::sqrt(2 * std::numbers::pi);

void require(bool ok, const std::string& what) {
    if (!ok) throw AssumptionViolated(what);
}

}  // namespace

Vec ReluNet::operator()(const Vec& x) const {
    Vec h = (W1 * x).unaryExpr([](double v) { return relu(v); });
    return W2 * h;
}

double ReluNet::max_weight() const {
    double m = 0;
    if (W1.size()) m = std::max(m, W1.cwiseAbs().maxCoeff());
    if (W2.size()) m = std::max(m, W2.cwiseAbs().maxCoeff());
    return m;
}

double mult_lambda(double M, double eps) {
    require(M > 0 && eps > 0, "multiplication gadget needs M > 0 and eps > 0");
    return std::ceil(10 * M * M * M / (3 * eps));
}

Mlp build_mult_mlp(double M, double eps) {
    const double lambda = mult_lambda(M, eps);
    Mlp f;
    f.lambda = lambda;
    f.eps = eps;
    f.W1.resize(4, 2);
    f.W1 << 1, 1, -1, -1, 1, -1, -1, 1;
    f.W1 /= lambda;
    const double c = kSqrt2Pi * lambda * lambda / 8;
    f.W2.resize(1, 4);
    f.W2 << c, c, -c, -c;
    return f;
}

double relu_sim_lambda(double M, std::size_t d, double eps) {
    require(eps > 0, "eps must be positive");
    return M * static_cast<double>(d) / (kSqrt2Pi * eps);
}

Mlp build_relu_sim(const ReluNet& g, double eps) {
    if (g.W2.cols() != g.W1.rows()) throw DimensionMismatch("ReLU net shapes do not chain");
    Mlp f;
    f.eps = eps;
    const double M = g.max_weight();
    if (M == 0) {
        f.W1 = Mat::Zero(g.W1.rows(), g.W1.cols());
        f.W2 = Mat::Zero(g.W2.rows(), g.W2.cols());
        f.lambda = 1;
        return f;
    }
    f.lambda = relu_sim_lambda(M, static_cast<std::size_t>(g.W1.rows()), eps);
    f.W1 = g.W1 * f.lambda;
    f.W2 = g.W2 / f.lambda;
    return f;
}

ReluNet linear_relu_net(const Mat& W) {
    const Eigen::Index out = W.rows(), in = W.cols();
    ReluNet g;
    g.W1.resize(2 * out, in);
    g.W1 << W, -W;
    g.W2.resize(out, 2 * out);
    g.W2 << Mat::Identity(out, out), -Mat::Identity(out, out);
    return g;
}

Mlp build_linear_mlp(const Mat& W, double eps) { return build_relu_sim(linear_relu_net(W), eps); }

ReluNet selection_relu_net(std::size_t d, double M, double alpha) {
    require(M > 0 && alpha > 0, "selection needs M > 0 and alpha > 0");
    const auto D = static_cast<Eigen::Index>(d);
    const double s = M / alpha;
    ReluNet g;
    g.W1 = Mat::Zero(2 * D + 2, 2 * D + 1);
    g.W2 = Mat::Zero(D, 2 * D + 2);
    for (Eigen::Index k = 0; k < D; ++k) {
        g.W1(k, k) = 1;
        g.W1(k, 2 * D) = s;
        g.W1(D + k, D + k) = 1;
        g.W1(D + k, 2 * D) = -s;
        g.W2(k, k) = 1;
        g.W2(k, D + k) = 1;
        g.W2(k, 2 * D) = -1;
        g.W2(k, 2 * D + 1) = -1;
    }
    g.W1(2 * D, 2 * D) = s;
    g.W1(2 * D + 1, 2 * D) = -s;
    return g;
}

Mlp build_selection_mlp(std::size_t d, double M, double alpha, double eps) {
    return build_relu_sim(selection_relu_net(d, M, alpha), eps);
}

LookupTable one_hot_table(std::size_t k, std::size_t d,
                          const std::function<std::size_t(const std::vector<std::size_t>&)>& g) {
    LookupTable t{k, d, d, {}};
    std::vector<std::size_t> idx(k, 0);
    while (true) {
        const std::size_t v = g(idx);
        if (v >= d) throw DimensionMismatch("table value outside the output alphabet");
        LookupEntry e;
        e.key.assign(idx.begin(), idx.end());
        e.value = Vec::Zero(static_cast<Eigen::Index>(d));
        e.value(static_cast<Eigen::Index>(v)) = 1;
        t.entries.push_back(std::move(e));
        std::size_t pos = 0;
        while (pos < k && ++idx[pos] == d) idx[pos++] = 0;
        if (pos == k) break;
    }
    return t;
}

ReluNet lookup_relu_net(const LookupTable& t) {
    const auto units = static_cast<Eigen::Index>(t.entries.size());
    const auto in = static_cast<Eigen::Index>(t.k * t.d + 1);
    ReluNet g;
    g.W1 = Mat::Zero(units, in);
    g.W2 = Mat::Zero(static_cast<Eigen::Index>(t.out), units);
    for (Eigen::Index u = 0; u < units; ++u) {
        const auto& e = t.entries[static_cast<std::size_t>(u)];
        if (e.key.size() != t.k || static_cast<std::size_t>(e.value.size()) != t.out)
            throw DimensionMismatch("lookup entry does not match the table shape");
        int read = 0;
        for (std::size_t grp = 0; grp < t.k; ++grp) {
            if (e.key[grp] < 0) continue;
            if (static_cast<std::size_t>(e.key[grp]) >= t.d) throw DimensionMismatch("lookup key outside the alphabet");
            g.W1(u, static_cast<Eigen::Index>(grp * t.d) + e.key[grp]) = 2;
            ++read;
        }
        g.W1(u, in - 1) = -2.0 * read + 1;
        g.W2.col(u) = e.value;
    }
    return g;
}

Mlp build_lookup_mlp(const LookupTable& t, double eps) { return build_relu_sim(lookup_relu_net(t), eps); }

GadgetParams copy_params(double M, double eps, double delta, std::size_t n) {
    require(eps > 0 && delta > 0 && M >= delta && n >= 1, "COPY needs eps > 0, delta > 0, M >= delta, n >= 1");
    GadgetParams p{M, eps, delta, 0, 0, 0, n};
    const double L = std::log(2.0 * static_cast<double>(n) * M / eps);
    p.lambda = 8 * M * L / (delta * delta);
    p.mu = 3 * L / delta;
    p.rho = delta * delta / (8 * M);
    return p;
}

GadgetParams mean_params(double M, double eps, double delta, std::size_t n) {
    require(eps > 0 && delta > 0 && M >= delta && n >= 1 && eps <= M,
            "MEAN needs 0 < eps <= M, delta > 0, M >= delta, n >= 1");
    GadgetParams p{M, eps, delta, 0, 0, 0, n};
    const double L = std::log(4.0 * M * static_cast<double>(n) / eps);
    p.lambda = L / delta;
    p.rho = delta * eps / (16 * M * L);
    return p;
}

namespace {

void check_shapes(const Mat& Q, const Mat& K, const Mat& V) {
    if (Q.rows() != K.rows() || Q.cols() != K.cols() || V.cols() != Q.cols())
        throw DimensionMismatch("Q, K, V shapes are inconsistent");
}

}  // namespace

HeadWeights build_copy_head(const Mat& Q, const Mat& K, const Mat& V, const Vec& R, const GadgetParams& p) {
    check_shapes(Q, K, V);
    if (R.size() != 0 && R.size() != Q.cols()) throw DimensionMismatch("priority form does not match the stream");
    require(p.eps > 0 && p.delta > 0 && p.rho > 0 && p.M >= p.delta, "COPY parameters out of range");
    require(p.rho <= p.delta * p.delta / (8 * p.M) * (1 + 1e-12), "COPY needs rho <= delta^2 / (8M)");
    const GadgetParams ref = copy_params(p.M, p.eps, p.delta, p.n);
    return HeadWeights{Q, K, V, R, ref.lambda, ref.mu};
}

HeadWeights build_mean_head(const Mat& Q, const Mat& K, const Mat& V, const GadgetParams& p) {
    check_shapes(Q, K, V);
    require(p.eps > 0 && p.delta > 0 && p.rho > 0 && p.M >= p.delta && p.eps <= p.M, "MEAN parameters out of range");
    const GadgetParams ref = mean_params(p.M, p.eps, p.delta, p.n);
    require(p.rho <= ref.rho * (1 + 1e-12), "MEAN needs rho <= delta eps / (16 M ln(4Mn/eps))");
    return HeadWeights{Q, K, V, Vec(), ref.lambda, 0};
}

AssumptionReport check_attention_assumption(const Mat& X, const Mat& Q, const Mat& K, const Vec& R, double rho,
                                            double delta, const Mat* V, double value_tol) {
    if (Q.cols() != X.cols() || K.cols() != X.cols() || Q.rows() != K.rows())
        throw DimensionMismatch("Q, K do not match the stream");
    AssumptionReport rep;
    const Mat q = X * Q.transpose();
    const Mat k = X * K.transpose();
    Mat v;
    if (V) v = X * V->transpose();
    if (R.size() != 0 && R.size() != X.cols()) throw DimensionMismatch("priority form does not match the stream");
    const bool has_r = R.size() != 0;
    const Vec r = has_r ? Vec(X * R) : Vec();
    const Eigen::Index n = X.rows();
    auto fail = [&](Eigen::Index i, Eigen::Index j, double val, std::string what) {
        if (!rep.ok) return;
        rep.ok = false;
        rep.i = static_cast<long>(i);
        rep.j = static_cast<long>(j);
        rep.value = val;
        rep.what = std::move(what);
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = -1;
        bool tie = false;
        for (Eigen::Index j = 0; j <= i; ++j) {
            ++rep.pairs;
            const double s = q.row(i).dot(k.row(j));
            const bool match = std::abs(s) <= rho;
            if (match) {
                rep.max_match = std::max(rep.max_match, std::abs(s));
            } else {
                rep.max_outside = std::max(rep.max_outside, s);
                if (s > -delta) fail(i, j, s, "score neither within rho of 0 nor below -delta");
            }
            if (has_r) {
                const double d = std::abs(r(i) - r(j));
                if (d > value_tol && d < delta) fail(i, j, d, "priorities closer than delta");
                if (match) {
                    if (best < 0 || r(j) > r(best) + value_tol) {
                        best = j;
                        tie = false;
                    } else if (std::abs(r(j) - r(best)) <= value_tol) {
                        const bool same = V && (v.row(j) - v.row(best)).cwiseAbs().maxCoeff() <= value_tol;
                        if (!same) tie = true;
                    }
                }
            }
        }
        if (tie) fail(i, best, r(best), "largest priority in the matching set is not unique");
    }
    return rep;
}

}  // namespace cotlab
