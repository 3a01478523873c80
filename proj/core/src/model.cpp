#include "cotlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cotlab/arith.hpp"
#include "cotlab/datagen.hpp"
#include "cotlab/equation.hpp"
#include "model_build.hpp"

namespace cotlab {

namespace detail {

Vec Form::dense(std::size_t width) const {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(width));
    for (const auto& [c, w] : terms) {
        if (c >= width) throw DimensionMismatch("form refers to a column outside the stream");
        v(static_cast<Eigen::Index>(c)) += w;
    }
    return v;
}

Mat rows(const std::vector<Form>& forms, std::size_t width) {
    Mat M(static_cast<Eigen::Index>(forms.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < forms.size(); ++r) M.row(static_cast<Eigen::Index>(r)) = forms[r].dense(width).transpose();
    return M;
}

void MlpBuilder::add(std::string name, std::string kind, const Mlp& g, const std::vector<Form>& inputs,
                     const std::vector<long>& out_cols, std::string out_slot, double out_scale) {
    if (inputs.size() != g.inputs() || out_cols.size() != g.outputs())
        throw DimensionMismatch("gadget '" + name + "' wiring does not match its shape");
    for (Eigen::Index u = 0; u < g.W1.rows(); ++u) {
        const auto row = static_cast<int>(hidden_ + static_cast<std::size_t>(u));
        for (Eigen::Index k = 0; k < g.W1.cols(); ++k) {
            const double w = g.W1(u, k);
            if (w == 0) continue;
            for (const auto& [c, a] : inputs[static_cast<std::size_t>(k)].terms)
                if (a != 0) t1_.emplace_back(row, static_cast<int>(c), w * a);
        }
    }
    for (Eigen::Index o = 0; o < g.W2.rows(); ++o) {
        const long c = out_cols[static_cast<std::size_t>(o)];
        if (c < 0) continue;
        if (static_cast<std::size_t>(c) >= width_) throw DimensionMismatch("gadget output outside the stream");
        for (Eigen::Index u = 0; u < g.W2.cols(); ++u) {
            const double w = g.W2(o, u);
            if (w != 0) t2_.emplace_back(static_cast<int>(c), static_cast<int>(hidden_ + static_cast<std::size_t>(u)), w * out_scale);
        }
    }
    records_.push_back({std::move(name), std::move(kind), std::move(out_slot), g.eps * std::abs(out_scale), g.lambda,
                        hidden_, g.hidden()});
    hidden_ += g.hidden();
}

void MlpBuilder::finish(LayerSpec& layer) const {
    layer.W1.resize(static_cast<Eigen::Index>(hidden_), static_cast<Eigen::Index>(width_));
    layer.W1.setFromTriplets(t1_.begin(), t1_.end());
    layer.W1.prune(0.0);
    layer.W2.resize(static_cast<Eigen::Index>(width_), static_cast<Eigen::Index>(hidden_));
    layer.W2.setFromTriplets(t2_.begin(), t2_.end());
    layer.W2.prune(0.0);
    layer.gadgets = records_;
}

void GadgetBuilder::mult(MlpBuilder& b, const std::string& name, const Form& x, double sx, const Form& y, double sy,
                         const std::string& out, double eps) {
    const Mlp g = build_mult_mlp(1, eps);
    b.add(name, "mult", g, {(1 / sx) * x, (1 / sy) * y}, {c(out)}, out, sx * sy);
    bound_ += g.W2.cwiseAbs().maxCoeff() * sx * sy + g.W1.cwiseAbs().maxCoeff() / std::min(sx, sy);
}

void GadgetBuilder::relu_sim(MlpBuilder& b, const std::string& name, const std::string& kind, const ReluNet& r,
                             double eps, const std::vector<Form>& in, const std::vector<long>& out,
                             const std::string& out_slot) {
    const Mlp g = build_relu_sim(r, eps);
    b.add(name, kind, g, in, out, out_slot);
    double in_max = 1;
    for (const auto& f : in)
        for (const auto& t : f.terms) in_max = std::max(in_max, std::abs(t.second));
    bound_ += g.W1.cwiseAbs().maxCoeff() * in_max + g.W2.cwiseAbs().maxCoeff();
}

void GadgetBuilder::head(LayerSpec& L, HeadSpec h) {
    bound_ += h.w.lambda * h.w.Q.cwiseAbs().maxCoeff() + h.w.K.cwiseAbs().maxCoeff() + h.w.V.cwiseAbs().maxCoeff();
    if (h.w.R.size()) bound_ += h.w.mu * h.w.R.cwiseAbs().maxCoeff();
    L.heads.push_back(std::move(h));
}

void ReluUnits::add(std::size_t out, double coeff, const Form& pre) {
    if (out >= outputs_) throw DimensionMismatch("unit output out of range");
    pre_.push_back(pre);
    w2_.emplace_back(out, pre_.size() - 1, coeff);
}

void ReluUnits::step(std::size_t out, const Form& x, double coeff) {
    add(out, coeff, x);
    add(out, -coeff, x - one_);
}

void ReluUnits::is_zero(std::size_t out, const Form& x, double coeff) {
    add(out, coeff, x + one_);
    add(out, -2 * coeff, x);
    add(out, coeff, x - one_);
}

void ReluUnits::emit(GadgetBuilder& gb, MlpBuilder& mb, const std::string& name, double eps,
                     const std::vector<long>& out_cols, const std::string& out_slot) const {
    const auto h = static_cast<Eigen::Index>(pre_.size());
    ReluNet r;
    r.W1 = Mat::Identity(h, h);
    r.W2 = Mat::Zero(static_cast<Eigen::Index>(outputs_), h);
    for (const auto& [o, u, w] : w2_) r.W2(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(u)) += w;
    gb.relu_sim(mb, name, "relu", r, eps, pre_, out_cols, out_slot);
}

ReluNet relu_net(std::initializer_list<std::initializer_list<double>> w1, std::initializer_list<double> w2) {
    ReluNet r;
    r.W1.resize(static_cast<Eigen::Index>(w1.size()), static_cast<Eigen::Index>(w1.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : w1) {
        Eigen::Index j = 0;
        for (double v : row) r.W1(i, j++) = v;
        ++i;
    }
    r.W2.resize(1, static_cast<Eigen::Index>(w2.size()));
    Eigen::Index j = 0;
    for (double v : w2) r.W2(0, j++) = v;
    return r;
}

std::vector<long> slot_cols(const SlotLayout& l, const std::string& slot) {
    const Slot& s = l.at(slot);
    std::vector<long> out(s.width);
    for (std::size_t k = 0; k < s.width; ++k) out[k] = static_cast<long>(s.begin + k);
    return out;
}

HeadSpec make_head(std::string name, HeadKind kind, const Mat& Q, const Mat& K, const Mat& V, const Vec& R,
                   const GadgetParams& params, std::string out_slot) {
    HeadSpec h;
    h.name = std::move(name);
    h.kind = kind;
    h.params = params;
    h.w = kind == HeadKind::copy ? build_copy_head(Q, K, V, R, params) : build_mean_head(Q, K, V, params);
    h.out_slot = std::move(out_slot);
    return h;
}

void finalize(ModelSpec& m) {
    m.layout.validate();
    for (const auto& s : m.layout.slots()) m.magnitude_bound = std::max(m.magnitude_bound, s.bound);
    for (auto& L : m.layers) {
        double e = 0;
        for (const auto& s : m.layout.slots()) {
            if (s.name.rfind(L.name + ".", 0) == 0) e = std::max(e, s.tol);
        }
        L.eps = e;
    }
    // Doubles represent every integer up to 2^53 exactly; beyond that the gadgets'
    // cancellations lose all precision.
    if (!(m.weight_bound <= std::ldexp(1.0, 53)))
        throw ParameterOverflow("weight bound " + std::to_string(m.weight_bound) + " exceeds 2^53 for n_max " +
                                std::to_string(m.n_max));
}

}  // namespace detail

std::size_t ModelSpec::token_id(std::string_view tok) const {
    for (std::size_t k = 0; k < vocab.size(); ++k) {
        if (vocab[k] == tok) return k;
    }
    throw ParseError("token '" + std::string(tok) + "' is not in the model vocabulary", 0);
}

const LayerSpec& ModelSpec::layer(std::string_view name) const {
    for (const auto& L : layers) {
        if (L.name == name) return L;
    }
    throw DimensionMismatch("no layer named '" + std::string(name) + "'");
}

LayerSpec& ModelSpec::layer(std::string_view name) {
    return const_cast<LayerSpec&>(static_cast<const ModelSpec&>(*this).layer(name));
}

double ModelSpec::max_abs_weight() const {
    auto amax = [](const Mat& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; };
    auto smax = [](const SpMat& M) {
        double m = 0;
        for (Eigen::Index r = 0; r < M.outerSize(); ++r)
            for (SpMat::InnerIterator it(M, r); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    };
    double m = std::max({amax(embed), amax(unembed), unembed_bias.size() ? unembed_bias.cwiseAbs().maxCoeff() : 0.0});
    for (const auto& L : layers) {
        for (const auto& h : L.heads) {
            // the query weights carry lambda and the priority weights carry mu
            m = std::max({m, h.w.lambda * amax(h.w.Q), amax(h.w.K), amax(h.w.V)});
            if (h.w.R.size()) m = std::max(m, h.w.mu * h.w.R.cwiseAbs().maxCoeff());
        }
        m = std::max({m, smax(L.W1), smax(L.W2)});
    }
    return m;
}

Runner::Runner(const ModelSpec& model, int quantize_bits) : m_(&model), bits_(quantize_bits) {
    const auto n = static_cast<Eigen::Index>(model.n_max);
    X_ = Mat::Zero(n, static_cast<Eigen::Index>(model.layout.width()));
    for (const auto& L : model.layers) {
        keys_.emplace_back();
        vals_.emplace_back();
        prio_.emplace_back();
        for (const auto& h : L.heads) {
            keys_.back().push_back(Mat::Zero(n, h.w.K.rows()));
            vals_.back().push_back(Mat::Zero(n, h.w.V.rows()));
            prio_.back().push_back(Vec::Zero(n));
        }
    }
}

void Runner::quantize_row(Eigen::Index i) {
    if (bits_ <= 0 || bits_ >= 52) return;
    for (Eigen::Index c = 0; c < X_.cols(); ++c) X_(i, c) = quantize(X_(i, c), bits_);
}

Vec Runner::push(std::string_view tok) {
    if (n_ >= m_->n_max) throw LengthExceeded("sequence longer than n_max = " + std::to_string(m_->n_max));
    const auto i = static_cast<Eigen::Index>(n_);
    const auto id = static_cast<Eigen::Index>(m_->token_id(tok));
    X_.row(i) = m_->embed.row(id);
    X_(i, static_cast<Eigen::Index>(m_->layout.col(m_->pos_slot))) = static_cast<double>(n_ + 1);
    quantize_row(i);
    for (std::size_t l = 0; l < m_->layers.size(); ++l) {
        const LayerSpec& L = m_->layers[l];
        const Vec x = X_.row(i).transpose();
        std::vector<Vec> outs;
        for (std::size_t h = 0; h < L.heads.size(); ++h) {
            const HeadWeights& w = L.heads[h].w;
            keys_[l][h].row(i) = (w.K * x).transpose();
            vals_[l][h].row(i) = (w.V * x).transpose();
            prio_[l][h](i) = w.R.size() ? w.R.dot(x) : 0.0;
            const Vec q = w.Q * x;
            Vec s = w.lambda * (keys_[l][h].topRows(i + 1) * q);
            if (w.R.size()) s += w.mu * prio_[l][h].head(i + 1);
            const double mx = s.maxCoeff();
            Vec a = (s.array() - mx).exp();
            a /= a.sum();
            outs.push_back(vals_[l][h].topRows(i + 1).transpose() * a);
        }
        for (std::size_t h = 0; h < L.heads.size(); ++h) {
            const auto b = static_cast<Eigen::Index>(m_->layout.col(L.heads[h].out_slot));
            X_.row(i).segment(b, outs[h].size()) += outs[h].transpose();
        }
        quantize_row(i);
        if (L.W1.rows() > 0) {
            const Vec xr = X_.row(i).transpose();
            const Vec hdn = (L.W1 * xr).unaryExpr([](double v) { return gelu(v); });
            X_.row(i) += (L.W2 * hdn).transpose();
            quantize_row(i);
        }
    }
    ++n_;
    return m_->unembed * X_.row(i).transpose() + m_->unembed_bias;
}

DecodeResult decode(const ModelSpec& model, const Tokens& prompt, std::size_t max_steps, int quantize_bits) {
    if (prompt.empty()) throw ParseError("empty prompt", 0);
    if (prompt.size() + max_steps > model.n_max)
        throw LengthExceeded("prompt length " + std::to_string(prompt.size()) + " plus " + std::to_string(max_steps) +
                             " steps exceeds n_max = " + std::to_string(model.n_max));
    Runner run(model, quantize_bits);
    Vec logits;
    for (const auto& t : prompt) logits = run.push(t);
    DecodeResult res;
    for (std::size_t step = 0; step < max_steps; ++step) {
        Eigen::Index arg = 0;
        logits.maxCoeff(&arg);
        const std::string& tok = model.vocab[static_cast<std::size_t>(arg)];
        res.output.push_back(tok);
        if (tok == kEos) {
            res.stopped = true;
            break;
        }
        if (run.size() == model.n_max) break;
        logits = run.push(tok);
    }
    res.stream = run.stream();
    return res;
}

std::vector<HeadCheck> check_heads(const ModelSpec& model, const Mat& stream) {
    std::vector<HeadCheck> out;
    for (const auto& L : model.layers) {
        for (const auto& h : L.heads) {
            const Mat* V = h.kind == HeadKind::copy ? &h.w.V : nullptr;
            const Vec R = h.kind == HeadKind::copy ? h.w.R : Vec();
            out.push_back({L.name, h.name,
                           check_attention_assumption(stream, h.w.Q, h.w.K, R, h.params.rho, h.params.delta, V, 1e-3)});
        }
    }
    return out;
}

std::vector<SlotDiagnostic> compare_slots(const ModelSpec& model, const Mat& stream, const SlotReference& ref,
                                          std::optional<std::size_t> only_position) {
    std::vector<SlotDiagnostic> out;
    for (const auto& [slot, values] : ref) {
        const Slot& s = model.layout.at(slot);
        const std::string layer = slot.substr(0, slot.find('.'));
        const double tol = std::max(s.tol, 1e-12);
        const auto col = static_cast<Eigen::Index>(s.begin);
        for (std::size_t i = 0; i < values.size() && i < static_cast<std::size_t>(stream.rows()); ++i) {
            if (!values[i] || (only_position && *only_position != i)) continue;
            const double got = stream(static_cast<Eigen::Index>(i), col);
            if (!(std::abs(got - *values[i]) <= tol)) out.push_back({slot, layer, i, *values[i], got});
        }
    }
    std::sort(out.begin(), out.end(), [](const SlotDiagnostic& a, const SlotDiagnostic& b) {
        return a.position != b.position ? a.position < b.position : a.slot < b.slot;
    });
    return out;
}

namespace {

SlotReference reference_for(const ModelSpec& model, const Tokens& seq) {
    return model.task == Task::arithmetic ? arithmetic_reference(seq, model.p) : equation_reference(seq, model.p);
}

}  // namespace

InstanceReport run_instance(const ModelSpec& model, const Tokens& prompt, const Tokens& expected, int quantize_bits) {
    InstanceReport rep;
    rep.prompt = join(prompt);
    rep.expected = join(expected);
    const std::size_t budget = model.n_max > prompt.size() ? model.n_max - prompt.size() : 0;
    const DecodeResult res = decode(model, prompt, std::min(budget, expected.size() + 1), quantize_bits);
    rep.produced = join(res.output);
    rep.match = res.output == expected;
    if (!rep.match) {
        std::size_t k = 0;
        while (k < res.output.size() && k < expected.size() && res.output[k] == expected[k]) ++k;
        rep.first_divergence = static_cast<long>(k);
        Tokens seq = prompt;
        seq.insert(seq.end(), res.output.begin(), res.output.end());
        if (!seq.empty() && seq.back() == kEos) seq.pop_back();
        seq.resize(std::min(seq.size(), static_cast<std::size_t>(res.stream.rows())));
        // The wrong token was produced at the position holding the last correct token.
        const std::size_t pos = prompt.size() + k - 1;
        const SlotReference ref = reference_for(model, seq);
        for (std::size_t at = 0; at <= pos && at < static_cast<std::size_t>(res.stream.rows()); ++at) {
            auto d = compare_slots(model, res.stream, ref, at);
            rep.diagnostics.insert(rep.diagnostics.end(), d.begin(), d.end());
        }
    }
    return rep;
}

VerifyReport verify(const ModelSpec& model, const VerifyOptions& opt) {
    VerifyReport rep;
    rep.trials = opt.trials;
    rep.quantize_bits = opt.quantize_bits;
    rep.max_weight = model.max_abs_weight();
    rep.weight_bound = model.weight_bound;
    for (std::size_t k = 0; k < opt.trials; ++k) {
        Rng rng(derive_seed(opt.seed, k));
        CotSample s;
        if (model.task == Task::arithmetic) {
            const std::size_t ops = 1 + rng.below(opt.max_ops);
            s = cot_trace(gen_arithmetic(ops, model.p, rng).expr);
        } else {
            const std::size_t m = 1 + rng.below(std::min(opt.max_vars, model.m_max));
            s = gauss_trace(gen_equation(m, model.p, rng));
        }
        const Tokens seq = serialize_tokens(s);
        Tokens prompt(seq.begin(), seq.begin() + static_cast<long>(s.problem.size() + 1));
        Tokens expected(seq.begin() + static_cast<long>(prompt.size()), seq.end());
        expected.emplace_back(kEos);
        InstanceReport inst;
        if (seq.size() + 1 > model.n_max) {
            inst.prompt = join(prompt);
            inst.expected = join(expected);
            inst.produced = "(trace longer than n_max)";
            ++rep.too_long;
        } else {
            inst = run_instance(model, prompt, expected, opt.quantize_bits);
        }
        if (!inst.match) {
            ++rep.mismatches;
            const Tokens got = split_ws(inst.produced);
            const std::size_t ans = s.answer.size() + 1;
            const bool final_ok = got.size() >= ans && expected.size() >= ans &&
                                  std::equal(got.end() - static_cast<long>(ans), got.end(),
                                             expected.end() - static_cast<long>(ans));
            if (!final_ok) ++rep.final_mismatches;
            rep.failures.push_back(std::move(inst));
        }
        if (opt.check_assumption && seq.size() + 1 <= model.n_max) {
            Runner run(model, 0);
            for (const auto& t : seq) run.push(t);
            for (const auto& hc : check_heads(model, run.stream())) {
                ++rep.heads_checked;
                if (!hc.report.ok) {
                    ++rep.head_failures;
                    if (rep.head_failure_notes.size() < 20) {
                        std::ostringstream o;
                        o << "trial " << k << " " << hc.layer << "." << hc.head << " at (" << hc.report.i << ","
                          << hc.report.j << "): " << hc.report.what << " (" << hc.report.value << ")";
                        rep.head_failure_notes.push_back(o.str());
                    }
                }
            }
        }
    }
    return rep;
}

std::string VerifyReport::to_text() const {
    std::ostringstream o;
    o << "trials: " << trials << "\n";
    o << "mismatches: " << mismatches << "\n";
    o << "final_answer_mismatches: " << final_mismatches << "\n";
    o << "longer_than_n_max: " << too_long << "\n";
    o << "quantize_bits: " << quantize_bits << "\n";
    o << "heads_checked: " << heads_checked << "\n";
    o << "head_failures: " << head_failures << "\n";
    o << "max_weight: " << max_weight << "\n";
    o << "weight_bound: " << weight_bound << "\n";
    o << "status: " << (ok() ? "ok" : "failed") << "\n";
    for (const auto& n : head_failure_notes) o << "head_failure: " << n << "\n";
    for (const auto& f : failures) {
        o << "mismatch:\n  prompt: " << f.prompt << "\n  expected: " << f.expected << "\n  produced: " << f.produced
          << "\n  first_divergence: " << f.first_divergence << "\n";
        std::size_t shown = 0;
        for (const auto& d : f.diagnostics) {
            if (++shown > 12) break;
            o << "  slot " << d.slot << " (" << d.layer << ") at position " << d.position + 1 << ": expected "
              << d.expected << ", got " << d.actual << "\n";
        }
    }
    return o.str();
}

std::vector<NamedTensor> model_tensors(const ModelSpec& m) {
    std::vector<NamedTensor> out;
    auto dense = [&](std::string name, const Mat& M) { out.push_back({std::move(name), false, M, {}}); };
    auto sparse = [&](std::string name, const SpMat& M) { out.push_back({std::move(name), true, {}, M}); };
    dense("embed", m.embed);
    dense("unembed", m.unembed);
    dense("unembed_bias", m.unembed_bias.transpose());
    for (const auto& L : m.layers) {
        for (const auto& h : L.heads) {
            const std::string p = L.name + "." + h.name + ".";
            Mat scale(1, 2);
            scale << h.w.lambda, h.w.mu;
            dense(p + "scale", scale);
            dense(p + "Q", h.w.Q);
            dense(p + "K", h.w.K);
            dense(p + "V", h.w.V);
            if (h.w.R.size()) dense(p + "R", h.w.R.transpose());
        }
        sparse(L.name + ".W1", L.W1);
        sparse(L.name + ".W2", L.W2);
    }
    return out;
}

void save_model(const ModelSpec& model, const std::string& path) {
    auto t = model_tensors(model);
    Mat meta(1, 4);
    meta << static_cast<double>(model.task == Task::arithmetic ? 0 : 1), static_cast<double>(model.p),
        static_cast<double>(model.n_max), static_cast<double>(model.m_max);
    t.insert(t.begin(), NamedTensor{"meta", false, meta, {}});
    write_bundle(path, t);
}

void load_weights(ModelSpec& model, const std::string& path) {
    const auto tensors = read_bundle(path);
    auto find = [&](const std::string& name) -> const NamedTensor& {
        for (const auto& t : tensors) {
            if (t.name == name) return t;
        }
        throw IoError("bundle has no tensor '" + name + "'");
    };
    const Mat& meta = find("meta").dense;
    if (meta.size() != 4 || meta(0, 1) != static_cast<double>(model.p) ||
        meta(0, 2) != static_cast<double>(model.n_max) || meta(0, 3) != static_cast<double>(model.m_max))
        throw IoError("bundle was written for a different model configuration");
    auto dense = [&](const std::string& name, Mat& dst) {
        const Mat& src = find(name).dense;
        if (src.rows() != dst.rows() || src.cols() != dst.cols()) throw IoError("shape mismatch for " + name);
        dst = src;
    };
    auto sparse = [&](const std::string& name, SpMat& dst) {
        const NamedTensor& t = find(name);
        if (!t.sparse || t.sp.rows() != dst.rows() || t.sp.cols() != dst.cols())
            throw IoError("shape mismatch for " + name);
        dst = t.sp;
    };
    dense("embed", model.embed);
    dense("unembed", model.unembed);
    Mat bias = model.unembed_bias.transpose();
    dense("unembed_bias", bias);
    model.unembed_bias = bias.transpose();
    for (auto& L : model.layers) {
        for (auto& h : L.heads) {
            const std::string p = L.name + "." + h.name + ".";
            Mat scale(1, 2);
            dense(p + "scale", scale);
            h.w.lambda = scale(0, 0);
            h.w.mu = scale(0, 1);
            dense(p + "Q", h.w.Q);
            dense(p + "K", h.w.K);
            dense(p + "V", h.w.V);
            if (h.w.R.size()) {
                Mat R = h.w.R.transpose();
                dense(p + "R", R);
                h.w.R = R.transpose();
            }
        }
        sparse(L.name + ".W1", L.W1);
        sparse(L.name + ".W2", L.W2);
    }
}

void scale_gadget(ModelSpec& model, std::string_view layer, std::string_view gadget, double factor) {
    LayerSpec& L = model.layer(layer);
    for (const auto& g : L.gadgets) {
        if (g.name != gadget) continue;
        for (std::size_t u = g.hidden_begin; u < g.hidden_begin + g.hidden; ++u)
            L.W1.row(static_cast<Eigen::Index>(u)) *= factor;
        return;
    }
    throw DimensionMismatch("layer " + std::string(layer) + " has no gadget '" + std::string(gadget) + "'");
}

}  // namespace cotlab
