#include "cotlab/datagen.hpp"

#include "cotlab/errors.hpp"

namespace cotlab {

Tokens task_vocabulary(Task task, std::int64_t p, std::size_t vars, std::size_t length) {
    Tokens v;
    switch (task) {
        case Task::arithmetic:
            for (std::int64_t i = 0; i < p; ++i) v.push_back(std::to_string(i));
            for (const char* s : {"+", "−", "×", "÷", "(", ")"}) v.emplace_back(s);
            break;
        case Task::equation:
            for (std::int64_t i = 0; i < p; ++i) v.push_back(std::to_string(i));
            for (std::size_t k = 0; k < vars; ++k) v.push_back(variable_token(k));
            for (const char* s : {"+", "=", ","}) v.emplace_back(s);
            break;
        case Task::lis:
            for (std::size_t i = 1; i <= length; ++i) v.push_back(std::to_string(i));
            for (std::int64_t i = kLisMin; i <= kLisMax; ++i) v.push_back(std::to_string(i));
            break;
        case Task::ed: {
            for (char c = 'a'; c <= 'z'; ++c) v.emplace_back(1, c);
            v.emplace_back("|");
            // dp values are bounded by insert+delete cost times the lengths
            const std::size_t top = 2 * (2 * length + 2);
            for (std::size_t i = 0; i <= top; ++i) v.push_back(std::to_string(i));
            break;
        }
    }
    return v;
}

CorruptionResult corrupt(const CotSample& s, double gamma, const Tokens& vocab, Rng& rng) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("gamma must lie in [0, 1]");
    CorruptionResult r;
    r.sample = s;
    const std::size_t inter = s.intermediate_count();
    r.steps = inter;
    std::vector<Tokens> kept;
    for (std::size_t k = 0; k < inter; ++k) {
        if (rng.bernoulli(gamma)) {
            ++r.omitted;
            continue;
        }
        Tokens step = s.steps[k];
        if (rng.bernoulli(gamma) && !step.empty() && vocab.size() > 1) {
            const std::size_t at = rng.below(step.size());
            // Uniform over the vocabulary minus the current token.
            std::size_t others = vocab.size();
            for (const auto& t : vocab) others -= (t == step[at]) ? 1 : 0;
            std::size_t pick = rng.below(others);
            for (const auto& t : vocab) {
                if (t == step[at]) continue;
                if (pick-- == 0) {
                    step[at] = t;
                    break;
                }
            }
            ++r.corrupted;
        }
        kept.push_back(std::move(step));
    }
    // Segments after the intermediate ones (the arithmetic final numeral).
    for (std::size_t k = inter; k < s.steps.size(); ++k) kept.push_back(s.steps[k]);
    r.sample.steps = std::move(kept);
    return r;
}

}  // namespace cotlab
