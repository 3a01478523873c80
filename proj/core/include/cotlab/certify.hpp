#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cotlab {

struct LemmaOptions {
    double eps = 1e-3;
    std::size_t trials = 1000;  // random sequences per attention head
    std::size_t seq_len = 32;
    std::uint64_t seed = 1;
};

struct LemmaCheck {
    std::string name;
    std::string what;
    double measured = 0;
    double tolerance = 0;
    std::size_t samples = 0;
    bool pass = false;
    std::string note;
};

struct LemmaReport {
    std::vector<LemmaCheck> checks;
    double seconds = 0;

    bool ok() const;
    std::string to_text() const;
};

// Empirical certification of every gadget at the requested eps:
// multiplication on a grid over [-5, 5]^2, ReLU simulation and linear maps on random
// inputs, selection on both branches, argmax-exact lookup tables, and COPY/MEAN heads
// on random sequences that satisfy the attention gap assumption.
LemmaReport certify_lemmas(const LemmaOptions& opt);

}  // namespace cotlab
