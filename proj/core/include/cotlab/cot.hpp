#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cotlab {

using Tokens = std::vector<std::string>;

enum class Task { arithmetic, equation, lis, ed };

std::string_view task_name(Task t);
Task task_from_name(std::string_view name);

// Arithmetic separates segments with '=', every other task with '[SEP]'.
std::string_view step_delimiter(Task t);

inline constexpr std::string_view kEos = "<eos>";
inline constexpr std::string_view kSep = "[SEP]";

enum class Format { cot, direct };

struct CotSample {
    Task task = Task::arithmetic;
    Tokens problem;
    // For arithmetic the last step is the final numeral and equals answer.
    std::vector<Tokens> steps;
    Tokens answer;

    // Segments strictly between problem and answer.
    std::size_t intermediate_count() const;
    const Tokens& intermediate(std::size_t k) const { return steps[k]; }
    Tokens& intermediate(std::size_t k) { return steps[k]; }

    friend bool operator==(const CotSample&, const CotSample&) = default;
};

// Flat token sequence: problem, delimiter, steps..., answer. No '<eos>'.
Tokens serialize_tokens(const CotSample& s, Format f = Format::cot);
std::string serialize(const CotSample& s, Format f = Format::cot);
// Tokens joined without spaces, as the samples are printed in prose.
std::string compact(const Tokens& toks);
std::string join(const Tokens& toks, std::string_view sep = " ");
Tokens split_ws(std::string_view text);

// Inverse of serialize for the cot format; a trailing '<eos>' is ignored.
CotSample parse_sample(Task task, std::string_view line);

}  // namespace cotlab
