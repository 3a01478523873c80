#include "cotlab/cot.hpp"

#include <sstream>

#include "cotlab/arith.hpp"
#include "cotlab/errors.hpp"

namespace cotlab {

std::string_view task_name(Task t) {
    switch (t) {
        case Task::arithmetic: return "arithmetic";
        case Task::equation: return "equation";
        case Task::lis: return "lis";
        case Task::ed: return "ed";
    }
    return "?";
}

Task task_from_name(std::string_view name) {
    if (name == "arithmetic") return Task::arithmetic;
    if (name == "equation") return Task::equation;
    if (name == "lis") return Task::lis;
    if (name == "ed") return Task::ed;
    throw Error("unknown task '" + std::string(name) + "'");
}

std::string_view step_delimiter(Task t) { return t == Task::arithmetic ? "=" : kSep; }

std::size_t CotSample::intermediate_count() const {
    if (task == Task::arithmetic) return steps.empty() ? 0 : steps.size() - 1;
    return steps.size();
}

Tokens serialize_tokens(const CotSample& s, Format f) {
    const std::string delim(step_delimiter(s.task));
    Tokens out = s.problem;
    auto append = [&](const Tokens& seg) {
        out.push_back(delim);
        out.insert(out.end(), seg.begin(), seg.end());
    };
    if (f == Format::cot) {
        for (const auto& st : s.steps) append(st);
        if (s.task != Task::arithmetic || s.steps.empty()) append(s.answer);
    } else {
        append(s.answer);
    }
    return out;
}

std::string join(const Tokens& toks, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out += sep;
        out += toks[i];
    }
    return out;
}

std::string serialize(const CotSample& s, Format f) { return join(serialize_tokens(s, f)); }

std::string compact(const Tokens& toks) { return join(toks, ""); }

Tokens split_ws(std::string_view text) {
    Tokens out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < text.size() && !(text[j] == ' ' || text[j] == '\t' || text[j] == '\n' || text[j] == '\r')) ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

CotSample parse_sample(Task task, std::string_view line) {
    Tokens toks = split_ws(line);
    if (!toks.empty() && toks.back() == kEos) toks.pop_back();
    const std::string delim(step_delimiter(task));
    std::vector<Tokens> segs(1);
    for (auto& t : toks) {
        if (t == delim) {
            segs.emplace_back();
        } else {
            segs.back().push_back(std::move(t));
        }
    }
    if (segs.size() < 2) throw ParseError("sample has no answer segment", toks.size());
    CotSample s;
    s.task = task;
    s.problem = std::move(segs.front());
    s.answer = segs.back();
    if (task == Task::arithmetic) {
        bool has_op = false;
        for (const auto& t : s.problem) has_op = has_op || is_operator_text(t);
        if (has_op) s.steps.assign(segs.begin() + 1, segs.end());
    } else {
        s.steps.assign(segs.begin() + 1, segs.end() - 1);
    }
    return s;
}

}  // namespace cotlab
