#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cotlab/arith.hpp"
#include "cotlab/cot.hpp"
#include "cotlab/dp.hpp"
#include "cotlab/equation.hpp"
#include "cotlab/rng.hpp"

namespace cotlab {

struct GenConfig {
    Task task = Task::arithmetic;
    std::size_t count = 1000;       // training samples requested
    std::size_t test_count = 0;     // held-out samples; 0 disables the split
    std::uint64_t seed = 0;
    std::int64_t p = 11;
    std::size_t ops = 6;            // arithmetic operator count
    std::size_t vars = 3;           // equation variable count
    std::size_t length = 16;        // LIS sequence length / ED first-string length
    Format format = Format::cot;

    void validate() const;
};

struct ArithInstance {
    Expr expr;
    std::int64_t answer;  // the number the generator started from
};

ArithInstance gen_arithmetic(std::size_t n, std::int64_t p, Rng& rng);
LinearSystem gen_equation(std::size_t m, std::int64_t p, Rng& rng);

struct LisInstance {
    std::vector<std::int64_t> seq;
    std::size_t l;  // length of the planted sorted part
    std::size_t t;  // number of sorted runs
};
inline constexpr std::int64_t kLisMin = 101;
inline constexpr std::int64_t kLisMax = 250;
LisInstance gen_lis(std::size_t n, Rng& rng);

struct EdInstance {
    std::string s1;
    std::string s2;
    std::string alphabet;  // the sampled subset T
    bool independent;      // true for the random second-string branch
};
EdInstance gen_ed(std::size_t n, Rng& rng);

// One sample of the configured task; the stream index selects the sub-seed.
CotSample gen_sample(const GenConfig& cfg, std::uint64_t stream);

// Corruption ---------------------------------------------------------------

struct CorruptionConfig {
    double gamma = 0.1;
    std::uint64_t seed = 0;
};

struct CorruptionResult {
    CotSample sample;
    std::size_t steps = 0;      // intermediate steps before corruption
    std::size_t omitted = 0;
    std::size_t corrupted = 0;
};

// Vocabulary used for single-token replacements (delimiters excluded).
Tokens task_vocabulary(Task task, std::int64_t p, std::size_t vars, std::size_t length);

CorruptionResult corrupt(const CotSample& s, double gamma, const Tokens& vocab, Rng& rng);

// Reductions ---------------------------------------------------------------

Expr reduce_boolean(std::string_view formula, std::int64_t p = 11);
// Truth value by direct recursive evaluation of the formula.
int eval_boolean(std::string_view formula);

struct Automaton {
    int num_states = 1;
    int num_symbols = 1;
    std::vector<int> delta;  // delta[q * num_symbols + a]
    std::vector<bool> accept;
    int q0 = 0;

    int step(int q, int a) const { return delta[static_cast<std::size_t>(q * num_symbols + a)]; }
    void validate() const;
};

bool simulate(const Automaton& d, const std::vector<int>& word);

struct AutomatonReduction {
    LinearSystem system;
    std::size_t x_star = 0;
    // Index of x_{i,q}.
    std::size_t var(std::size_t i, int q) const { return 1 + i * static_cast<std::size_t>(num_states) + static_cast<std::size_t>(q); }
    int num_states = 1;
};

AutomatonReduction reduce_automaton(const Automaton& d, const std::vector<int>& word, std::int64_t p);

// Datasets -----------------------------------------------------------------

std::uint64_t fnv1a(std::string_view bytes);

struct DatasetSummary {
    std::size_t train_written = 0;
    std::size_t test_written = 0;
    std::size_t removed_duplicates = 0;
    std::uint64_t train_hash = 0;
    std::uint64_t test_hash = 0;
};

std::string plain_line(const CotSample& s, Format f);
std::string structured_line(const CotSample& s, const GenConfig& cfg, std::uint64_t sample_seed);

// Lines for stream indices [begin, end) of the training split, skipping
// problems that appear in `exclude`. Sharding concatenates these ranges.
std::vector<std::string> gen_lines(const GenConfig& cfg, std::size_t begin, std::size_t end, bool structured,
                                   const std::vector<std::uint64_t>* exclude = nullptr);

// Training samples for stream indices [0, count), generated by `shards` threads.
// The result does not depend on the shard count.
std::vector<CotSample> gen_samples(const GenConfig& cfg, std::size_t count, std::size_t shards = 1);

// Writes <out>.train.txt, <out>.test.txt (when test_count > 0) and
// <out>.manifest.json, plus .jsonl structured twins.
DatasetSummary build_dataset(const GenConfig& cfg, const std::string& out_prefix, std::size_t shards = 1);

}  // namespace cotlab
