#pragma once

#include <initializer_list>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cotlab/model.hpp"

namespace cotlab::detail {

// A linear form over stream columns.
struct Form {
    std::vector<std::pair<std::size_t, double>> terms;

    static Form col(std::size_t c, double w = 1) { return Form{{{c, w}}}; }
    Form& operator+=(const Form& o) {
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        return *this;
    }
    friend Form operator+(Form a, const Form& b) { return a += b; }
    friend Form operator*(double k, Form a) {
        for (auto& t : a.terms) t.second *= k;
        return a;
    }
    friend Form operator-(Form a, const Form& b) { return a += -1.0 * b; }
    Vec dense(std::size_t width) const;
};

Mat rows(const std::vector<Form>& forms, std::size_t width);

// Collects gadgets into one sparse MLP acting on the whole stream.
class MlpBuilder {
public:
    explicit MlpBuilder(std::size_t width) : width_(width) {}

    // out_cols[o] < 0 drops that gadget output.
    void add(std::string name, std::string kind, const Mlp& g, const std::vector<Form>& inputs,
             const std::vector<long>& out_cols, std::string out_slot, double out_scale = 1);
    void finish(LayerSpec& layer) const;

private:
    std::size_t width_;
    std::size_t hidden_ = 0;
    std::vector<Eigen::Triplet<double>> t1_, t2_;
    std::vector<GadgetRecord> records_;
};

std::vector<long> slot_cols(const SlotLayout& l, const std::string& slot);

HeadSpec make_head(std::string name, HeadKind kind, const Mat& Q, const Mat& K, const Mat& V, const Vec& R,
                   const GadgetParams& params, std::string out_slot);

// Accumulates gadgets and heads of a model under construction, together with a
// running sum of the largest weight each one contributes.
class GadgetBuilder {
public:
    explicit GadgetBuilder(ModelSpec& m) : m_(m) {}

    Form s(const std::string& slot, std::size_t k = 0) const { return Form::col(m_.layout.col(slot, k)); }
    long c(const std::string& slot, std::size_t k = 0) const { return static_cast<long>(m_.layout.col(slot, k)); }
    std::size_t width() const { return m_.layout.width(); }
    Mat rows(const std::vector<Form>& f) const { return detail::rows(f, width()); }

    // x * y for |x| <= sx, |y| <= sy, computed on the rescaled unit square.
    void mult(MlpBuilder& b, const std::string& name, const Form& x, double sx, const Form& y, double sy,
              const std::string& out, double eps);
    void relu_sim(MlpBuilder& b, const std::string& name, const std::string& kind, const ReluNet& r, double eps,
                  const std::vector<Form>& in, const std::vector<long>& out, const std::string& out_slot);
    void head(LayerSpec& L, HeadSpec h);
    // Records a weight contribution computed outside the helpers.
    void note_weight(double w) { bound_ += w; }
    double bound() const { return bound_; }

private:
    ModelSpec& m_;
    double bound_ = 0;
};

// A one-hidden-layer ReLU network written unit by unit: each unit is a linear form
// of the stream and each output a signed sum of units.
class ReluUnits {
public:
    ReluUnits(std::size_t outputs, Form one) : outputs_(outputs), one_(std::move(one)) {}

    void add(std::size_t out, double coeff, const Form& pre);
    // [x >= 1] for integer x.
    void step(std::size_t out, const Form& x, double coeff = 1);
    // [x == 0] for integer x.
    void is_zero(std::size_t out, const Form& x, double coeff = 1);
    const Form& one() const { return one_; }

    // Emits the units as one gadget.
    void emit(GadgetBuilder& gb, MlpBuilder& mb, const std::string& name, double eps, const std::vector<long>& out_cols,
              const std::string& out_slot) const;

private:
    std::size_t outputs_;
    Form one_;
    std::vector<Form> pre_;
    std::vector<std::tuple<std::size_t, std::size_t, double>> w2_;
};

ReluNet relu_net(std::initializer_list<std::initializer_list<double>> w1, std::initializer_list<double> w2);

// Max |w| over every tensor; throws ParameterOverflow when the recorded bound is too large for doubles.
void finalize(ModelSpec& m);

}  // namespace cotlab::detail
