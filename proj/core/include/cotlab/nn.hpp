#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cotlab/errors.hpp"

namespace cotlab {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Slot {
    std::string name;
    std::size_t begin = 0;
    std::size_t width = 0;
    std::string note;
    double bound = 0;  // documented magnitude bound of the channel
    double tol = 0;    // accepted deviation from the exact quantity
};

// Named, disjoint column ranges of a residual stream.
class SlotLayout {
public:
    std::size_t add(std::string name, std::size_t width, std::string note = {}, double bound = 0, double tol = 0);
    bool contains(std::string_view name) const;
    const Slot& at(std::string_view name) const;
    std::size_t col(std::string_view name, std::size_t k = 0) const;
    std::size_t width() const { return width_; }
    const std::vector<Slot>& slots() const { return slots_; }
    // Throws DimensionMismatch if any slot overlaps another or leaves [0, width).
    void validate() const;

private:
    std::vector<Slot> slots_;
    std::size_t width_ = 0;
};

struct TensorBundle {
    Mat data;  // sequence x width
    SlotLayout layout;

    explicit TensorBundle(SlotLayout l, std::size_t rows = 0);
    std::size_t rows() const { return static_cast<std::size_t>(data.rows()); }
    auto slot(std::string_view name) { const Slot& s = layout.at(name); return data.middleCols(static_cast<Eigen::Index>(s.begin), static_cast<Eigen::Index>(s.width)); }
    auto slot(std::string_view name) const { const Slot& s = layout.at(name); return data.middleCols(static_cast<Eigen::Index>(s.begin), static_cast<Eigen::Index>(s.width)); }
};

double gelu(double x);
double relu(double x);

// One attention head. Scores are lambda * (Q x_i).(K x_j) + mu * (R . x_j);
// Q and K map the stream to the same head dimension, V to the value width.
// An empty R means no priority term.
struct HeadWeights {
    Mat Q, K, V;
    Vec R;
    double lambda = 1;
    double mu = 0;
};

// Causal softmax attention of a single head over all rows of X.
Mat attention_forward(const HeadWeights& h, const Mat& X, bool causal = true);
// Returns the attention weights a_ij (row i over j) as well.
Mat attention_weights(const HeadWeights& h, const Mat& X, bool causal = true);

// Several heads whose outputs are written into disjoint column ranges of a copy of
// the input (concatenation semantics).
struct PlacedHead {
    HeadWeights w;
    std::size_t out_begin = 0;
};
TensorBundle attention_forward(const std::vector<PlacedHead>& heads, const TensorBundle& in, bool causal = true);

// Position-wise two-layer FFN: W2 * gelu(W1 * x).
Mat gelu_mlp_forward(const Mat& W1, const Mat& W2, const Mat& X);
Mat gelu_mlp_forward(const SpMat& W1, const SpMat& W2, const Mat& X);
Vec gelu_mlp_forward(const Mat& W1, const Mat& W2, const Vec& x);

// Rounds every entry to the nearest value with the given number of explicit
// mantissa bits (52 keeps doubles unchanged).
double quantize(double x, int mantissa_bits);
Mat quantize(const Mat& m, int mantissa_bits);

// Flat weight bundle: a text header followed by little-endian float64 payloads.
//   cotlab-bundle 1
//   dense <name> <rows> <cols>
//   sparse <name> <rows> <cols> <nnz>
//   end
// Dense payloads are row-major; sparse payloads are nnz (row, col, value) triples.
struct NamedTensor {
    std::string name;
    bool sparse = false;
    Mat dense;
    SpMat sp;
};

void write_bundle(std::ostream& out, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_bundle(std::istream& in);
void write_bundle(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_bundle(const std::string& path);

}  // namespace cotlab
