#include "cotlab/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cotlab {

std::size_t SlotLayout::add(std::string name, std::size_t width, std::string note, double bound, double tol) {
    if (contains(name)) throw DimensionMismatch("slot '" + name + "' defined twice");
    Slot s{std::move(name), width_, width, std::move(note), bound, tol};
    width_ += width;
    slots_.push_back(std::move(s));
    return slots_.back().begin;
}

bool SlotLayout::contains(std::string_view name) const {
    return std::any_of(slots_.begin(), slots_.end(), [&](const Slot& s) { return s.name == name; });
}

const Slot& SlotLayout::at(std::string_view name) const {
    for (const auto& s : slots_) {
        if (s.name == name) return s;
    }
    throw DimensionMismatch("unknown slot '" + std::string(name) + "'");
}

std::size_t SlotLayout::col(std::string_view name, std::size_t k) const {
    const Slot& s = at(name);
    if (k >= s.width) throw DimensionMismatch("slot '" + s.name + "' has no column " + std::to_string(k));
    return s.begin + k;
}

void SlotLayout::validate() const {
    std::vector<const Slot*> sorted;
    for (const auto& s : slots_) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(), [](const Slot* a, const Slot* b) { return a->begin < b->begin; });
    std::size_t end = 0;
    for (const Slot* s : sorted) {
        if (s->begin < end) throw DimensionMismatch("slot '" + s->name + "' overlaps its predecessor");
        end = s->begin + s->width;
    }
    if (end > width_) throw DimensionMismatch("slot layout exceeds its width");
}

TensorBundle::TensorBundle(SlotLayout l, std::size_t rows) : layout(std::move(l)) {
    layout.validate();
    data = Mat::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(layout.width()));
}

double gelu(double x) { return 0.5 * x * std::erfc(-x / std::sqrt(2.0)); }
double relu(double x) { return x > 0 ? x : 0; }

namespace {

void check_head(const HeadWeights& h, Eigen::Index width) {
    if (h.Q.cols() != width || h.K.cols() != width || h.V.cols() != width)
        throw DimensionMismatch("head matrices do not match the stream width");
    if (h.Q.rows() != h.K.rows()) throw DimensionMismatch("query and key dimensions differ");
    if (h.R.size() != 0 && h.R.size() != width) throw DimensionMismatch("priority form does not match the stream");
}

}  // namespace

Mat attention_weights(const HeadWeights& h, const Mat& X, bool causal) {
    check_head(h, X.cols());
    const Mat q = X * h.Q.transpose();
    const Mat k = X * h.K.transpose();
    const Eigen::Index n = X.rows();
    Mat a = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index last = causal ? i : n - 1;
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j <= last; ++j) {
            double s = h.lambda * q.row(i).dot(k.row(j));
            if (h.R.size()) s += h.mu * X.row(j).dot(h.R);
            a(i, j) = s;
            mx = std::max(mx, s);
        }
        double z = 0;
        for (Eigen::Index j = 0; j <= last; ++j) {
            a(i, j) = std::exp(a(i, j) - mx);
            z += a(i, j);
        }
        a.row(i).head(last + 1) /= z;
    }
    return a;
}

Mat attention_forward(const HeadWeights& h, const Mat& X, bool causal) {
    const Mat a = attention_weights(h, X, causal);
    return a * (X * h.V.transpose());
}

TensorBundle attention_forward(const std::vector<PlacedHead>& heads, const TensorBundle& in, bool causal) {
    TensorBundle out = in;
    for (const auto& ph : heads) {
        const Mat o = attention_forward(ph.w, in.data, causal);
        if (ph.out_begin + static_cast<std::size_t>(o.cols()) > in.layout.width())
            throw DimensionMismatch("head output outside the stream");
        out.data.middleCols(static_cast<Eigen::Index>(ph.out_begin), o.cols()) += o;
    }
    return out;
}

Mat gelu_mlp_forward(const Mat& W1, const Mat& W2, const Mat& X) {
    if (W1.cols() != X.cols() || W2.cols() != W1.rows()) throw DimensionMismatch("MLP shapes do not chain");
    Mat h = X * W1.transpose();
    h = h.unaryExpr([](double v) { return gelu(v); });
    return h * W2.transpose();
}

Mat gelu_mlp_forward(const SpMat& W1, const SpMat& W2, const Mat& X) {
    if (W1.cols() != X.cols() || W2.cols() != W1.rows()) throw DimensionMismatch("MLP shapes do not chain");
    Mat h = (W1 * X.transpose()).transpose();
    h = h.unaryExpr([](double v) { return gelu(v); });
    return (W2 * h.transpose()).transpose();
}

Vec gelu_mlp_forward(const Mat& W1, const Mat& W2, const Vec& x) {
    if (W1.cols() != x.size() || W2.cols() != W1.rows()) throw DimensionMismatch("MLP shapes do not chain");
    Vec h = (W1 * x).unaryExpr([](double v) { return gelu(v); });
    return W2 * h;
}

double quantize(double x, int mantissa_bits) {
    if (mantissa_bits < 0 || mantissa_bits > 52) throw DimensionMismatch("mantissa width must be in [0, 52]");
    if (x == 0 || !std::isfinite(x)) return x;
    int e = 0;
    const double m = std::frexp(x, &e);  // |m| in [0.5, 1)
    const double scaled = std::nearbyint(std::ldexp(m, mantissa_bits + 1));
    return std::ldexp(scaled, e - mantissa_bits - 1);
}

Mat quantize(const Mat& m, int mantissa_bits) {
    return m.unaryExpr([mantissa_bits](double v) { return quantize(v, mantissa_bits); });
}

namespace {

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(bits >> (8 * b));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

double get_f64(std::istream& in) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) throw IoError("weight bundle payload truncated");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_bundle(std::ostream& out, const std::vector<NamedTensor>& tensors) {
    out << "cotlab-bundle 1\n";
    for (const auto& t : tensors) {
        if (t.name.empty() || t.name.find_first_of(" \t\n") != std::string::npos)
            throw IoError("tensor names must be non-empty and contain no whitespace");
        if (t.sparse)
            out << "sparse " << t.name << ' ' << t.sp.rows() << ' ' << t.sp.cols() << ' ' << t.sp.nonZeros() << '\n';
        else
            out << "dense " << t.name << ' ' << t.dense.rows() << ' ' << t.dense.cols() << '\n';
    }
    out << "end\n";
    for (const auto& t : tensors) {
        if (t.sparse) {
            for (Eigen::Index r = 0; r < t.sp.outerSize(); ++r) {
                for (SpMat::InnerIterator it(t.sp, r); it; ++it) {
                    put_f64(out, static_cast<double>(it.row()));
                    put_f64(out, static_cast<double>(it.col()));
                    put_f64(out, it.value());
                }
            }
        } else {
            for (Eigen::Index r = 0; r < t.dense.rows(); ++r)
                for (Eigen::Index c = 0; c < t.dense.cols(); ++c) put_f64(out, t.dense(r, c));
        }
    }
    if (!out) throw IoError("failed to write weight bundle");
}

std::vector<NamedTensor> read_bundle(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "cotlab-bundle 1") throw IoError("not a cotlab weight bundle");
    struct Header {
        NamedTensor t;
        long rows, cols, nnz;
    };
    std::vector<Header> headers;
    while (std::getline(in, line) && line != "end") {
        std::istringstream ls(line);
        std::string kind;
        Header h{};
        ls >> kind >> h.t.name >> h.rows >> h.cols;
        if (kind == "sparse") {
            ls >> h.nnz;
            h.t.sparse = true;
        } else if (kind != "dense") {
            throw IoError("unknown tensor kind '" + kind + "'");
        }
        if (!ls || h.rows < 0 || h.cols < 0) throw IoError("malformed bundle header line: " + line);
        headers.push_back(std::move(h));
    }
    if (line != "end") throw IoError("weight bundle header not terminated");
    std::vector<NamedTensor> out;
    for (auto& h : headers) {
        if (h.t.sparse) {
            std::vector<Eigen::Triplet<double>> trip;
            for (long k = 0; k < h.nnz; ++k) {
                const double r = get_f64(in), c = get_f64(in), v = get_f64(in);
                if (r < 0 || c < 0 || r >= h.rows || c >= h.cols) throw IoError("sparse index out of range");
                trip.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
            }
            h.t.sp.resize(h.rows, h.cols);
            h.t.sp.setFromTriplets(trip.begin(), trip.end());
        } else {
            h.t.dense.resize(h.rows, h.cols);
            for (long r = 0; r < h.rows; ++r)
                for (long c = 0; c < h.cols; ++c) h.t.dense(r, c) = get_f64(in);
        }
        out.push_back(std::move(h.t));
    }
    return out;
}

void write_bundle(const std::string& path, const std::vector<NamedTensor>& tensors) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_bundle(f, tensors);
}

std::vector<NamedTensor> read_bundle(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    return read_bundle(f);
}

}  // namespace cotlab
