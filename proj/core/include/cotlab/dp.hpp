#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cotlab/cot.hpp"
#include "cotlab/errors.hpp"

namespace cotlab {

using DpState = std::vector<int>;
using DpValue = std::int64_t;
using Sizes = std::vector<std::size_t>;  // the problem size vector n

enum class Aggregate { min, max, sum };

// f, g, h, the aggregation set and u describe one DP problem. States are
// enumerated by first/next, which must be a topological order.
struct DpSpec {
    std::string name;
    std::size_t J = 0;
    std::size_t K = 0;
    std::function<std::optional<DpState>(const Sizes&)> first;
    std::function<std::optional<DpState>(const Sizes&, const DpState&)> next;
    // Indices into the concatenated input; nullopt is the placeholder.
    std::function<std::vector<std::optional<std::size_t>>(const Sizes&, const DpState&)> g;
    std::function<std::vector<std::optional<DpState>>(const Sizes&, const DpState&)> h;
    std::function<DpValue(const Sizes&, const DpState&, const std::vector<std::optional<std::int64_t>>&,
                          const std::vector<std::optional<DpValue>>&)>
        f;
    Aggregate aggregate = Aggregate::max;
    std::function<bool(const Sizes&, const DpState&)> in_aggregate;
    std::function<DpValue(DpValue)> u = [](DpValue v) { return v; };
};

struct DpTrace {
    std::vector<std::pair<DpState, DpValue>> entries;
    DpValue answer = 0;
};

DpTrace run_dp(const DpSpec& spec, const std::vector<std::vector<std::int64_t>>& inputs);

// "(i, dp(i))" rendering of a trace, one pair per state.
std::string serialize_pairs(const DpTrace& t);

// LIS ------------------------------------------------------------------

enum class LisMode { experiment, framework };

DpSpec lis_spec();
DpTrace lis_dp(const std::vector<std::int64_t>& seq, LisMode mode = LisMode::experiment);
CotSample lis_sample(const std::vector<std::int64_t>& seq);
std::int64_t lis_brute(const std::vector<std::int64_t>& seq);

inline constexpr std::size_t kLisBruteCap = 16;

// Edit distance ----------------------------------------------------------

struct EdCosts {
    std::int64_t a = 2;  // insert
    std::int64_t b = 2;  // delete
    std::int64_t c = 3;  // replace
};

DpSpec ed_spec(EdCosts costs);
DpTrace ed_dp(const std::string& s1, const std::string& s2, EdCosts costs = {});
CotSample ed_sample(const std::string& s1, const std::string& s2, EdCosts costs = {});
std::int64_t ed_brute(const std::string& s1, const std::string& s2, EdCosts costs = {});

inline constexpr std::size_t kEdBruteCap = 8;

// CFG membership ---------------------------------------------------------

struct Symbol {
    bool terminal = false;
    int id = 0;

    friend bool operator==(const Symbol&, const Symbol&) = default;
};

struct CfgRule {
    int lhs = 0;
    bool epsilon = false;
    Symbol b;
    Symbol c;
};

// Nonterminals are 0..V-1, terminals 0..T-1, rules R_1..R_m in order.
struct Cfg {
    int num_nonterminals = 1;
    int num_terminals = 1;
    std::vector<CfgRule> rules;
    int start = 0;
};

void validate(const Cfg& g);
DpSpec cfg_spec(const Cfg& g);
std::pair<bool, DpTrace> cfg_membership(const Cfg& g, const std::vector<int>& word);
bool cfg_brute(const Cfg& g, const std::vector<int>& word);

inline constexpr std::size_t kCfgBruteCap = 6;

}  // namespace cotlab
