#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotlab/cot.hpp"
#include "cotlab/gadgets.hpp"

namespace cotlab {

enum class HeadKind { copy, mean };

struct HeadSpec {
    std::string name;
    HeadKind kind = HeadKind::copy;
    HeadWeights w;
    GadgetParams params;
    std::string out_slot;
};

// One gadget inside a layer's MLP, occupying hidden units [hidden_begin, hidden_begin + hidden).
struct GadgetRecord {
    std::string name;
    std::string kind;
    std::string out_slot;
    double eps = 0;
    double lambda = 0;
    std::size_t hidden_begin = 0;
    std::size_t hidden = 0;
};

struct LayerSpec {
    std::string name;
    std::vector<HeadSpec> heads;
    SpMat W1;  // hidden x width
    SpMat W2;  // width x hidden
    std::vector<GadgetRecord> gadgets;
    double eps = 0;  // tolerance of the slots this layer writes
};

struct ModelSpec {
    Task task = Task::arithmetic;
    std::int64_t p = 11;
    std::size_t n_max = 0;
    std::size_t m_max = 0;  // equation model only
    double eps = 0;         // requested end-to-end error
    SlotLayout layout;
    Tokens vocab;           // input and output alphabet
    Mat embed;              // |vocab| x width; the position slot is filled separately
    std::string pos_slot = "pos";
    Mat unembed;            // |vocab| x width
    Vec unembed_bias;       // |vocab|
    std::vector<LayerSpec> layers;
    double magnitude_bound = 0;  // largest documented slot bound
    double weight_bound = 0;     // polynomial weight bound recorded at build time

    std::size_t token_id(std::string_view tok) const;  // throws ParseError
    const LayerSpec& layer(std::string_view name) const;
    LayerSpec& layer(std::string_view name);
    double max_abs_weight() const;
};

// Incremental causal forward pass with cached keys and values.
class Runner {
public:
    explicit Runner(const ModelSpec& model, int quantize_bits = 0);

    // Appends a token and returns the output logits at its position.
    Vec push(std::string_view tok);
    std::size_t size() const { return n_; }
    Mat stream() const { return X_.topRows(static_cast<Eigen::Index>(n_)); }

private:
    void quantize_row(Eigen::Index i);

    const ModelSpec* m_;
    int bits_;
    Mat X_;
    std::vector<std::vector<Mat>> keys_;
    std::vector<std::vector<Mat>> vals_;
    std::vector<std::vector<Vec>> prio_;
    std::size_t n_ = 0;
};

struct DecodeResult {
    Tokens output;       // generated tokens, including a final "<eos>" if produced
    Mat stream;          // residual stream of prompt plus generated tokens
    bool stopped = false;
};

// Greedy decoding. Requires |prompt| + max_steps <= n_max, else LengthExceeded.
DecodeResult decode(const ModelSpec& model, const Tokens& prompt, std::size_t max_steps, int quantize_bits = 0);

struct HeadCheck {
    std::string layer;
    std::string head;
    AssumptionReport report;
};
// Runs the gap checker for every head on a final stream.
std::vector<HeadCheck> check_heads(const ModelSpec& model, const Mat& stream);

// Per-position ground truth for scalar slots; absent entries are not checked.
using SlotReference = std::map<std::string, std::vector<std::optional<double>>>;

struct SlotDiagnostic {
    std::string slot;
    std::string layer;
    std::size_t position = 0;  // 0-based
    double expected = 0;
    double actual = 0;
};
// Slots whose value differs from the reference by more than their layer's eps.
std::vector<SlotDiagnostic> compare_slots(const ModelSpec& model, const Mat& stream, const SlotReference& ref,
                                          std::optional<std::size_t> only_position = std::nullopt);

// Arithmetic construction ----------------------------------------------------

ModelSpec build_arithmetic_model(std::size_t n_max, std::int64_t p, double eps = 0.25);
// Longest generated sequence (prompt, CoT and '<eos>') for `ops` operators: 2(ops+1)^2 + 1.
std::size_t arithmetic_trace_bound(std::size_t ops);
SlotReference arithmetic_reference(const Tokens& sequence, std::int64_t p);

// Equation construction ------------------------------------------------------

// n_max = 0 picks equation_trace_bound(m_max).
ModelSpec build_equation_model(std::size_t m_max, std::int64_t p, double eps = 0.25, std::size_t n_max = 0);
// Longest sequence (prompt, CoT and '<eos>') for an m-variable system.
std::size_t equation_trace_bound(std::size_t m);
SlotReference equation_reference(const Tokens& sequence, std::int64_t p);
// Smallest unembedding gap over distinct output tokens before any scaling.
double equation_unembedding_gap(std::size_t m);

// Verification ---------------------------------------------------------------

struct InstanceReport {
    std::string prompt;
    std::string expected;
    std::string produced;
    bool match = false;
    long first_divergence = -1;  // index into the continuation
    std::vector<SlotDiagnostic> diagnostics;
};

struct VerifyReport {
    std::size_t trials = 0;
    std::size_t mismatches = 0;
    std::size_t final_mismatches = 0;  // wrong final answer
    std::size_t too_long = 0;          // traces that do not fit in n_max, counted as mismatches
    std::size_t heads_checked = 0;
    std::size_t head_failures = 0;
    std::vector<std::string> head_failure_notes;
    std::vector<InstanceReport> failures;  // mismatching instances only
    double max_weight = 0;
    double weight_bound = 0;
    int quantize_bits = 0;

    bool ok() const { return mismatches == 0 && head_failures == 0 && max_weight <= weight_bound; }
    std::string to_text() const;
};

struct VerifyOptions {
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    std::size_t max_ops = 7;   // arithmetic
    std::size_t max_vars = 3;  // equations
    int quantize_bits = 0;
    bool check_assumption = true;
};

VerifyReport verify(const ModelSpec& model, const VerifyOptions& opt);
// Decodes a single prompt such as "1+5×(1−2)=" or an equation system ending in "[SEP]".
InstanceReport run_instance(const ModelSpec& model, const Tokens& prompt, const Tokens& expected, int quantize_bits = 0);

// Weight bundles -------------------------------------------------------------

std::vector<NamedTensor> model_tensors(const ModelSpec& model);
void save_model(const ModelSpec& model, const std::string& path);
// Overwrites the weights of a model built with the same configuration.
void load_weights(ModelSpec& model, const std::string& path);

// Multiplies the first-layer weights of one MLP gadget by factor (fault injection).
void scale_gadget(ModelSpec& model, std::string_view layer, std::string_view gadget, double factor);

}  // namespace cotlab
