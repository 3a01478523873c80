#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cotlab/nn.hpp"

namespace cotlab {

// Two-layer GeLU MLP without bias: f(x) = W2 gelu(W1 x). Gadgets that need a
// bias read a constant-one input coordinate instead.
struct Mlp {
    Mat W1;
    Mat W2;
    double lambda = 0;  // the scaling the construction picked
    double eps = 0;     // the error it was built for

    std::size_t inputs() const { return static_cast<std::size_t>(W1.cols()); }
    std::size_t hidden() const { return static_cast<std::size_t>(W1.rows()); }
    std::size_t outputs() const { return static_cast<std::size_t>(W2.rows()); }
    Vec operator()(const Vec& x) const { return gelu_mlp_forward(W1, W2, x); }
};

struct ReluNet {
    Mat W1;
    Mat W2;

    Vec operator()(const Vec& x) const;
    double max_weight() const;
};

// Multiplication of two scalars in [-M, M]; hidden width 4.
double mult_lambda(double M, double eps);
Mlp build_mult_mlp(double M, double eps);

// GeLU network with the ReLU network's shape: W1 scaled by lambda, W2 by 1/lambda,
// lambda = M d / (sqrt(2 pi) eps) with M the largest ReLU weight and d the hidden width.
double relu_sim_lambda(double M, std::size_t d, double eps);
Mlp build_relu_sim(const ReluNet& g, double eps);

ReluNet linear_relu_net(const Mat& W);
Mlp build_linear_mlp(const Mat& W, double eps);

// Input (x, y, t) with x, y in R^d; returns x for t >= alpha and y for t <= -alpha.
ReluNet selection_relu_net(std::size_t d, double M, double alpha);
Mlp build_selection_mlp(std::size_t d, double M, double alpha, double eps);

// A table over k one-hot groups of width d. key[g] is the symbol expected in group g,
// or -1 when the entry ignores that group. Inputs are the k*d group coordinates
// followed by a constant 1. Entries whose value is zero can be left out.
struct LookupEntry {
    std::vector<int> key;
    Vec value;
};

struct LookupTable {
    std::size_t k = 0;
    std::size_t d = 0;
    std::size_t out = 0;
    std::vector<LookupEntry> entries;
};

// Full table of a function D^k -> D, as one-hot outputs of width d.
LookupTable one_hot_table(std::size_t k, std::size_t d,
                          const std::function<std::size_t(const std::vector<std::size_t>&)>& g);
ReluNet lookup_relu_net(const LookupTable& t);
Mlp build_lookup_mlp(const LookupTable& t, double eps);

// COPY and MEAN heads ------------------------------------------------------

// M bounds the value entries and priorities the head reads; n is the sequence length.
struct GadgetParams {
    double M = 1;
    double eps = 1e-3;
    double delta = 1;
    double rho = 0;
    double lambda = 0;
    double mu = 0;
    std::size_t n = 1;
};

// lambda = 8 M ln(2nM/eps) / delta^2, mu = 3 ln(2nM/eps) / delta, rho = delta^2 / (8M).
GadgetParams copy_params(double M, double eps, double delta, std::size_t n);
// lambda = ln(4Mn/eps) / delta, rho = delta eps / (16 M ln(4Mn/eps)).
GadgetParams mean_params(double M, double eps, double delta, std::size_t n);

// Both throw AssumptionViolated when the parameters break the lemma hypotheses.
HeadWeights build_copy_head(const Mat& Q, const Mat& K, const Mat& V, const Vec& R, const GadgetParams& p);
HeadWeights build_mean_head(const Mat& Q, const Mat& K, const Mat& V, const GadgetParams& p);

struct AssumptionReport {
    bool ok = true;
    std::size_t pairs = 0;
    long i = -1;  // first violation
    long j = -1;
    double value = 0;
    std::string what;
    double max_match = 0;                 // largest |q.k| inside matching sets
    double max_outside = -1e300;          // largest q.k outside them
};

// Checks, for every j <= i, that |q_i.k_j| <= rho or q_i.k_j <= -delta, and that the
// priorities r_j = R.x_j (if R is non-empty) are pairwise equal or delta apart. With V given, a tie for the largest
// priority inside a matching set is accepted only between equal value vectors.
AssumptionReport check_attention_assumption(const Mat& X, const Mat& Q, const Mat& K, const Vec& R, double rho,
                                            double delta, const Mat* V = nullptr, double value_tol = 1e-6);

}  // namespace cotlab
