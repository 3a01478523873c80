#include "cotlab/dp.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <unordered_map>

#include "cotlab/errors.hpp"

namespace cotlab {

namespace {

struct StateHash {
    std::size_t operator()(const DpState& s) const noexcept {
        std::size_t h = 0x9e3779b97f4a7c15ull;
        for (int v : s) h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return h;
    }
};

std::string state_text(const DpState& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

}  // namespace

DpTrace run_dp(const DpSpec& spec, const std::vector<std::vector<std::int64_t>>& inputs) {
    Sizes n;
    std::vector<std::int64_t> s;
    for (const auto& seq : inputs) {
        n.push_back(seq.size());
        s.insert(s.end(), seq.begin(), seq.end());
    }
    DpTrace trace;
    std::unordered_map<DpState, DpValue, StateHash> dp;
    std::optional<DpValue> acc;
    for (auto st = spec.first(n); st; st = spec.next(n, *st)) {
        auto gi = spec.g(n, *st);
        auto hi = spec.h(n, *st);
        if (gi.size() != spec.J || hi.size() != spec.K) throw SpecViolation(spec.name + ": g/h arity differs from J/K");
        std::vector<std::optional<std::int64_t>> xs(gi.size());
        for (std::size_t q = 0; q < gi.size(); ++q) {
            if (!gi[q]) continue;
            if (*gi[q] >= s.size()) throw SpecViolation(spec.name + ": input index out of range");
            xs[q] = s[*gi[q]];
        }
        std::vector<std::optional<DpValue>> ys(hi.size());
        for (std::size_t q = 0; q < hi.size(); ++q) {
            if (!hi[q]) continue;
            auto it = dp.find(*hi[q]);
            if (it == dp.end()) {
                throw SpecViolation(spec.name + ": state " + state_text(*st) + " reads uncomputed " +
                                    state_text(*hi[q]));
            }
            ys[q] = it->second;
        }
        const DpValue v = spec.f(n, *st, xs, ys);
        if (!dp.emplace(*st, v).second) throw SpecViolation(spec.name + ": state " + state_text(*st) + " enumerated twice");
        trace.entries.emplace_back(*st, v);
        if (spec.in_aggregate(n, *st)) {
            if (!acc) {
                acc = v;
            } else if (spec.aggregate == Aggregate::min) {
                acc = std::min(*acc, v);
            } else if (spec.aggregate == Aggregate::max) {
                acc = std::max(*acc, v);
            } else {
                *acc += v;
            }
        }
    }
    if (!acc) throw SpecViolation(spec.name + ": aggregation set is empty");
    trace.answer = spec.u(*acc);
    return trace;
}

std::string serialize_pairs(const DpTrace& t) {
    std::string out;
    for (const auto& [st, v] : t.entries) {
        if (!out.empty()) out += " ";
        out += "(" + state_text(st).substr(1);
        out.pop_back();
        out += ", " + std::to_string(v) + ")";
    }
    return out;
}

// LIS ------------------------------------------------------------------

DpSpec lis_spec() {
    DpSpec sp;
    sp.name = "lis";
    sp.J = 2;
    sp.K = 2;
    // states (j, k) with 1 <= j <= n, 0 <= k < j
    sp.first = [](const Sizes& n) -> std::optional<DpState> {
        if (n[0] == 0) return std::nullopt;
        return DpState{1, 0};
    };
    sp.next = [](const Sizes& n, const DpState& st) -> std::optional<DpState> {
        if (st[1] + 1 < st[0]) return DpState{st[0], st[1] + 1};
        if (static_cast<std::size_t>(st[0]) < n[0]) return DpState{st[0] + 1, 0};
        return std::nullopt;
    };
    sp.g = [](const Sizes&, const DpState& st) {
        std::vector<std::optional<std::size_t>> out(2);
        out[0] = static_cast<std::size_t>(st[0] - 1);
        if (st[1] > 0) out[1] = static_cast<std::size_t>(st[1] - 1);
        return out;
    };
    sp.h = [](const Sizes&, const DpState& st) {
        std::vector<std::optional<DpState>> out(2);
        if (st[1] > 0) {
            out[0] = DpState{st[0], st[1] - 1};
            out[1] = DpState{st[1], st[1] - 1};
        }
        return out;
    };
    sp.f = [](const Sizes&, const DpState& st, const auto& xs, const auto& ys) -> DpValue {
        if (st[1] == 0) return 1;
        const DpValue ext = *ys[1] * (*xs[0] > *xs[1] ? 1 : 0) + 1;
        return std::max(*ys[0], ext);
    };
    sp.aggregate = Aggregate::max;
    sp.in_aggregate = [](const Sizes&, const DpState& st) { return st[1] == st[0] - 1; };
    return sp;
}

DpTrace lis_dp(const std::vector<std::int64_t>& seq, LisMode mode) {
    if (seq.empty()) throw Error("lis requires a nonempty sequence");
    DpTrace t;
    const std::size_t n = seq.size();
    if (mode == LisMode::experiment) {
        std::vector<DpValue> dp(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (seq[j] < seq[i]) dp[i] = std::max(dp[i], dp[j] + 1);
            }
            t.entries.push_back({DpState{static_cast<int>(i + 1)}, dp[i]});
        }
        t.answer = *std::max_element(dp.begin(), dp.end());
        return t;
    }
    // dp[j][k], 1-based j, 0 <= k < j
    std::vector<std::vector<DpValue>> dp(n + 1);
    t.answer = 0;
    for (std::size_t j = 1; j <= n; ++j) {
        dp[j].assign(j, 1);
        for (std::size_t k = 1; k < j; ++k) {
            const DpValue ext = dp[k][k - 1] * (seq[j - 1] > seq[k - 1] ? 1 : 0) + 1;
            dp[j][k] = std::max(dp[j][k - 1], ext);
        }
        for (std::size_t k = 0; k < j; ++k) t.entries.push_back({DpState{int(j), int(k)}, dp[j][k]});
        t.answer = std::max(t.answer, dp[j][j - 1]);
    }
    return t;
}

CotSample lis_sample(const std::vector<std::int64_t>& seq) {
    CotSample s;
    s.task = Task::lis;
    for (auto v : seq) s.problem.push_back(std::to_string(v));
    DpTrace t = lis_dp(seq, LisMode::experiment);
    Tokens row;
    for (const auto& e : t.entries) row.push_back(std::to_string(e.second));
    s.steps.push_back(std::move(row));
    s.answer = {std::to_string(t.answer)};
    return s;
}

std::int64_t lis_brute(const std::vector<std::int64_t>& seq) {
    const std::size_t n = seq.size();
    if (n > kLisBruteCap) throw InstanceTooLarge("lis_brute: length " + std::to_string(n) + " exceeds cap");
    std::int64_t best = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::int64_t len = 0, last = 0;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (!(mask >> i & 1u)) continue;
            if (len > 0 && seq[i] <= last) ok = false;
            last = seq[i];
            ++len;
        }
        if (ok) best = std::max(best, len);
    }
    return best;
}

// Edit distance ----------------------------------------------------------

DpSpec ed_spec(EdCosts c) {
    DpSpec sp;
    sp.name = "ed";
    sp.J = 2;
    sp.K = 3;
    sp.first = [](const Sizes&) -> std::optional<DpState> { return DpState{0, 0}; };
    sp.next = [](const Sizes& n, const DpState& st) -> std::optional<DpState> {
        if (static_cast<std::size_t>(st[1]) < n[1]) return DpState{st[0], st[1] + 1};
        if (static_cast<std::size_t>(st[0]) < n[0]) return DpState{st[0] + 1, 0};
        return std::nullopt;
    };
    sp.g = [](const Sizes& n, const DpState& st) {
        std::vector<std::optional<std::size_t>> out(2);
        if (st[0] > 0 && st[1] > 0) {
            out[0] = static_cast<std::size_t>(st[0] - 1);
            out[1] = n[0] + static_cast<std::size_t>(st[1] - 1);
        }
        return out;
    };
    sp.h = [](const Sizes&, const DpState& st) {
        std::vector<std::optional<DpState>> out(3);
        if (st[0] > 0 && st[1] > 0) {
            out[0] = DpState{st[0], st[1] - 1};
            out[1] = DpState{st[0] - 1, st[1]};
            out[2] = DpState{st[0] - 1, st[1] - 1};
        }
        return out;
    };
    sp.f = [c](const Sizes&, const DpState& st, const auto& xs, const auto& ys) -> DpValue {
        if (st[0] == 0) return c.a * st[1];
        if (st[1] == 0) return c.b * st[0];
        return std::min({*ys[0] + c.a, *ys[1] + c.b, *ys[2] + c.c * (*xs[0] != *xs[1] ? 1 : 0)});
    };
    sp.aggregate = Aggregate::min;
    sp.in_aggregate = [](const Sizes& n, const DpState& st) {
        return static_cast<std::size_t>(st[0]) == n[0] && static_cast<std::size_t>(st[1]) == n[1];
    };
    return sp;
}

DpTrace ed_dp(const std::string& s1, const std::string& s2, EdCosts c) {
    const std::size_t n1 = s1.size(), n2 = s2.size();
    std::vector<std::vector<DpValue>> dp(n1 + 1, std::vector<DpValue>(n2 + 1));
    DpTrace t;
    for (std::size_t j = 0; j <= n1; ++j) {
        for (std::size_t k = 0; k <= n2; ++k) {
            if (j == 0) {
                dp[j][k] = c.a * static_cast<DpValue>(k);
            } else if (k == 0) {
                dp[j][k] = c.b * static_cast<DpValue>(j);
            } else {
                dp[j][k] = std::min({dp[j][k - 1] + c.a, dp[j - 1][k] + c.b,
                                     dp[j - 1][k - 1] + c.c * (s1[j - 1] != s2[k - 1] ? 1 : 0)});
            }
            t.entries.push_back({DpState{int(j), int(k)}, dp[j][k]});
        }
    }
    t.answer = dp[n1][n2];
    return t;
}

CotSample ed_sample(const std::string& s1, const std::string& s2, EdCosts c) {
    CotSample s;
    s.task = Task::ed;
    for (char ch : s1) s.problem.emplace_back(1, ch);
    s.problem.emplace_back("|");
    for (char ch : s2) s.problem.emplace_back(1, ch);
    DpTrace t = ed_dp(s1, s2, c);
    const std::size_t w = s2.size() + 1;
    for (std::size_t j = 1; j <= s1.size(); ++j) {
        Tokens row;
        for (std::size_t k = 1; k <= s2.size(); ++k) row.push_back(std::to_string(t.entries[j * w + k].second));
        if (!row.empty()) s.steps.push_back(std::move(row));
    }
    s.answer = {std::to_string(t.answer)};
    return s;
}

std::int64_t ed_brute(const std::string& s1, const std::string& s2, EdCosts c) {
    if (s1.size() > kEdBruteCap || s2.size() > kEdBruteCap) throw InstanceTooLarge("ed_brute: string exceeds cap");
    // Top-down over suffixes, memoized.
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> memo;
    std::function<std::int64_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::int64_t {
        if (i == s1.size()) return c.a * static_cast<std::int64_t>(s2.size() - j);
        if (j == s2.size()) return c.b * static_cast<std::int64_t>(s1.size() - i);
        auto key = std::make_pair(i, j);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::int64_t best = c.a + go(i, j + 1);
        best = std::min(best, c.b + go(i + 1, j));
        best = std::min(best, (s1[i] != s2[j] ? c.c : 0) + go(i + 1, j + 1));
        memo[key] = best;
        return best;
    };
    return go(0, 0);
}

// CFG membership ---------------------------------------------------------

void validate(const Cfg& g) {
    if (g.num_nonterminals < 1) throw NonCanonicalGrammar("grammar needs at least one nonterminal");
    if (g.num_terminals < 0) throw NonCanonicalGrammar("negative terminal count");
    if (g.start < 0 || g.start >= g.num_nonterminals) throw NonCanonicalGrammar("start symbol out of range");
    auto check = [&](const Symbol& s) {
        const int lim = s.terminal ? g.num_terminals : g.num_nonterminals;
        if (s.id < 0 || s.id >= lim) throw NonCanonicalGrammar("rule symbol out of range");
    };
    for (const auto& r : g.rules) {
        if (r.lhs < 0 || r.lhs >= g.num_nonterminals) throw NonCanonicalGrammar("rule head out of range");
        if (!r.epsilon) {
            check(r.b);
            check(r.c);
        }
    }
}

// State layout (t, i, j, k, A, r). Spans are enumerated by length, then
// start, then t, k, A, r. Operands on a strictly shorter span read its
// final iteration; operands on the same span read iteration t-1. This
// keeps the order acyclic while leaving |V| iterations sufficient.
DpSpec cfg_spec(const Cfg& grammar) {
    validate(grammar);
    auto G = std::make_shared<const Cfg>(grammar);
    const int V = grammar.num_nonterminals;
    const int m = static_cast<int>(grammar.rules.size());
    DpSpec sp;
    sp.name = "cfg";
    sp.J = 2;
    sp.K = 3;
    sp.first = [](const Sizes&) -> std::optional<DpState> { return DpState{0, 0, 0, 0, 0, 0}; };
    sp.next = [V, m](const Sizes& n, const DpState& st) -> std::optional<DpState> {
        DpState x = st;
        const int N = static_cast<int>(n[0]);
        if (++x[5] <= m) return x;
        x[5] = 0;
        if (++x[4] < V) return x;
        x[4] = 0;
        if (++x[3] <= x[2]) return x;
        x[3] = x[1];
        if (++x[0] <= V) return x;
        x[0] = 0;
        int len = x[2] - x[1];
        if (x[2] + 1 <= N) {
            ++x[1];
            ++x[2];
        } else if (++len <= N) {
            x[1] = 0;
            x[2] = len;
        } else {
            return std::nullopt;
        }
        x[3] = x[1];
        return x;
    };
    sp.g = [G](const Sizes&, const DpState& st) {
        const Cfg& gr = *G;
        std::vector<std::optional<std::size_t>> out(2);
        const int t = st[0], i = st[1], j = st[2], k = st[3], r = st[5];
        if (t > 0 && r > 0) {
            const auto& rule = gr.rules[static_cast<std::size_t>(r - 1)];
            if (!rule.epsilon) {
                if (rule.b.terminal && k == i + 1) out[0] = static_cast<std::size_t>(k - 1);
                if (rule.c.terminal && j == k + 1) out[1] = static_cast<std::size_t>(j - 1);
            }
        }
        return out;
    };
    sp.h = [G, V, m](const Sizes&, const DpState& st) {
        const Cfg& gr = *G;
        std::vector<std::optional<DpState>> out(3);
        const int t = st[0], i = st[1], j = st[2], k = st[3], A = st[4], r = st[5];
        if (t == 0) {
            if (i == j && r >= 1) out[0] = DpState{t, i, j, k, A, r - 1};
            return out;
        }
        if (r == 0) {
            out[0] = k == i ? DpState{t - 1, i, j, j, A, m} : DpState{t, i, j, k - 1, A, m};
            return out;
        }
        out[0] = DpState{t, i, j, k, A, r - 1};
        const auto& rule = gr.rules[static_cast<std::size_t>(r - 1)];
        if (rule.epsilon || rule.lhs != A) return out;
        if (!rule.b.terminal) out[1] = DpState{k == j ? t - 1 : V, i, k, k, rule.b.id, m};
        if (!rule.c.terminal) out[2] = DpState{k == i ? t - 1 : V, k, j, j, rule.c.id, m};
        return out;
    };
    sp.f = [G](const Sizes&, const DpState& st, const auto& xs, const auto& ys) -> DpValue {
        const Cfg& gr = *G;
        const int t = st[0], i = st[1], j = st[2], k = st[3], A = st[4], r = st[5];
        if (t == 0) {
            if (i < j || r == 0) return 0;
            const auto& rule = gr.rules[static_cast<std::size_t>(r - 1)];
            return (*ys[0] == 1 || (rule.epsilon && rule.lhs == A)) ? 1 : 0;
        }
        if (r == 0) return *ys[0];
        if (*ys[0] == 1) return 1;
        const auto& rule = gr.rules[static_cast<std::size_t>(r - 1)];
        if (rule.epsilon || rule.lhs != A) return 0;
        const bool b_ok = rule.b.terminal ? (k == i + 1 && xs[0] && *xs[0] == rule.b.id) : *ys[1] == 1;
        const bool c_ok = rule.c.terminal ? (j == k + 1 && xs[1] && *xs[1] == rule.c.id) : *ys[2] == 1;
        return b_ok && c_ok ? 1 : 0;
    };
    sp.aggregate = Aggregate::max;
    const int S = grammar.start;
    sp.in_aggregate = [V, m, S](const Sizes& n, const DpState& st) {
        const int N = static_cast<int>(n[0]);
        return st == DpState{V, 0, N, N, S, m};
    };
    return sp;
}

std::pair<bool, DpTrace> cfg_membership(const Cfg& g, const std::vector<int>& word) {
    for (int w : word) {
        if (w < 0 || w >= g.num_terminals) throw NonCanonicalGrammar("word uses a symbol outside the terminals");
    }
    DpSpec sp = cfg_spec(g);
    std::vector<std::int64_t> in(word.begin(), word.end());
    DpTrace t = run_dp(sp, {in});
    return {t.answer == 1, std::move(t)};
}

bool cfg_brute(const Cfg& g, const std::vector<int>& word) {
    validate(g);
    if (word.size() > kCfgBruteCap) throw InstanceTooLarge("cfg_brute: word exceeds cap");
    // Nullable nonterminals by plain fixed point.
    std::vector<bool> nullable(static_cast<std::size_t>(g.num_nonterminals), false);
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& r : g.rules) {
            if (nullable[static_cast<std::size_t>(r.lhs)]) continue;
            bool ok = r.epsilon || (!r.b.terminal && !r.c.terminal && nullable[static_cast<std::size_t>(r.b.id)] &&
                                    nullable[static_cast<std::size_t>(r.c.id)]);
            if (ok) {
                nullable[static_cast<std::size_t>(r.lhs)] = true;
                changed = true;
            }
        }
    }
    if (word.empty()) return nullable[static_cast<std::size_t>(g.start)];
    auto is_nullable = [&](const Symbol& s) { return !s.terminal && nullable[static_cast<std::size_t>(s.id)]; };

    // Leftmost derivations in which every symbol of a sentential form
    // yields at least one terminal, so forms never exceed |word|.
    using Form = std::vector<Symbol>;
    std::set<std::vector<std::pair<bool, int>>> seen;
    auto key = [](const Form& f) {
        std::vector<std::pair<bool, int>> k;
        for (const auto& s : f) k.emplace_back(s.terminal, s.id);
        return k;
    };
    std::deque<Form> queue;
    Form start{Symbol{false, g.start}};
    queue.push_back(start);
    seen.insert(key(start));
    while (!queue.empty()) {
        Form f = std::move(queue.front());
        queue.pop_front();
        std::size_t lead = 0;
        while (lead < f.size() && f[lead].terminal) {
            if (lead >= word.size() || f[lead].id != word[lead]) break;
            ++lead;
        }
        if (lead < f.size() && f[lead].terminal) continue;  // prefix mismatch
        if (lead == f.size()) {
            if (f.size() == word.size()) return true;
            continue;
        }
        const int X = f[lead].id;
        for (const auto& r : g.rules) {
            if (r.lhs != X || r.epsilon) continue;
            std::vector<Form> options;
            options.push_back({r.b, r.c});
            if (is_nullable(r.c)) options.push_back({r.b});
            if (is_nullable(r.b)) options.push_back({r.c});
            for (const auto& rep : options) {
                Form nf(f.begin(), f.begin() + static_cast<long>(lead));
                nf.insert(nf.end(), rep.begin(), rep.end());
                nf.insert(nf.end(), f.begin() + static_cast<long>(lead) + 1, f.end());
                if (nf.size() > word.size()) continue;
                if (seen.insert(key(nf)).second) queue.push_back(std::move(nf));
            }
        }
    }
    return false;
}

}  // namespace cotlab
