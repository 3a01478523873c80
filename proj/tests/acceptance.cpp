// Acceptance suite: one PASS/FAIL line per primary criterion, plus INFO lines
// for related measurements. Exit status is the number of failed criteria.
//
//   acceptance [--long]
//
// --long adds the p = 11 equation construction (about 20 s).

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "cli.hpp"
#include "cotlab/arith.hpp"
#include "cotlab/certify.hpp"
#include "cotlab/datagen.hpp"
#include "cotlab/dp.hpp"
#include "cotlab/equation.hpp"
#include "cotlab/model.hpp"

using namespace cotlab;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(bool pass, const std::string& name, const std::string& detail, double seconds) {
    if (!pass) ++failures;
    std::cout << fmt::format("{} {:<28} {} [{:.2f}s]", pass ? "PASS" : "FAIL", name, detail, seconds) << std::endl;
}

void info(const std::string& name, const std::string& detail) {
    std::cout << fmt::format("INFO {:<28} {}", name, detail) << std::endl;
}

// Worked examples --------------------------------------------------------------

void golden() {
    const auto t0 = Clock::now();
    std::vector<std::string> bad;
    const CotSample a = cot_trace(parse_compact("1+5×(1−2)=", 11));
    if (compact(serialize_tokens(a)) != "1+5×(1−2)=1+5×10=1+6=7") bad.push_back("arithmetic");

    const CotSample e =
        gauss_trace(parse_system("2 x1 + 3 x2 + 3 x3 = 8 , 1 x1 + 7 x2 + 0 x3 = 0 , 0 x1 + 2 x2 + 1 x3 = 1 ,", 11));
    const std::string es = serialize(e);
    const std::string tail = "x1 = 4 , x2 = 1 , x3 = 10 ,";
    if (es.size() < tail.size() || es.compare(es.size() - tail.size(), tail.size(), tail) != 0) bad.push_back("equation");

    const std::vector<std::int64_t> seq{103, 107, 109, 112, 101, 103, 105, 107, 115, 109, 111, 113, 102};
    const CotSample l = lis_sample(seq);
    if (l.steps.size() != 1 || join(l.steps[0]) != "1 2 3 4 1 2 3 4 5 5 6 7 2" || join(l.answer) != "7")
        bad.push_back("lis");

    const CotSample d = ed_sample("as", "pass");
    if (d.steps.size() != 2 || join(d.steps[0]) != "3 2 4 6" || join(d.steps[1]) != "5 4 2 4" || join(d.answer) != "4")
        bad.push_back("ed");

    const double s = since(t0);
    std::string detail = "arithmetic, equation, LIS and ED examples";
    for (const auto& b : bad) detail += "; mismatch in " + b;
    verdict(bad.empty() && s < 1.0, "golden examples", detail, s);
}

// Oracles ------------------------------------------------------------------------

Cfg random_cfg(Rng& rng) {
    Cfg g;
    g.num_nonterminals = 1 + static_cast<int>(rng.below(4));
    g.num_terminals = 2;
    const std::size_t rules = 1 + rng.below(6);
    auto sym = [&] {
        Symbol s;
        s.terminal = rng.below(2) == 0;
        s.id = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.terminal ? g.num_terminals : g.num_nonterminals)));
        return s;
    };
    for (std::size_t r = 0; r < rules; ++r) {
        CfgRule rule;
        rule.lhs = static_cast<int>(rng.below(static_cast<std::uint64_t>(g.num_nonterminals)));
        rule.epsilon = rng.below(4) == 0;
        if (!rule.epsilon) {
            rule.b = sym();
            rule.c = sym();
        }
        g.rules.push_back(rule);
    }
    return g;
}

void oracles() {
    const auto t0 = Clock::now();
    std::size_t arith_bad = 0, eq_bad = 0, lis_bad = 0, ed_bad = 0, cfg_bad = 0;

    Rng ra(101);
    for (int k = 0; k < 10000; ++k) {
        const ArithInstance inst = gen_arithmetic(ra.below(11), 11, ra);
        const CotSample s = cot_trace(inst.expr);
        const auto v = evaluate(inst.expr).value();
        bool ok = v == inst.answer && s.answer == Tokens{std::to_string(v)};
        for (const auto& step : s.steps) ok = ok && evaluate(parse_tokens(step, 11)).value() == v;
        if (!ok) ++arith_bad;
    }

    Rng re(102);
    for (int k = 0; k < 5000; ++k) {
        const std::int64_t p = k % 2 ? 11 : 5;
        const LinearSystem sys = gen_equation(1 + re.below(5), p, re);
        const CotSample s = gauss_trace(sys);
        const auto x = solve_direct(sys);
        bool ok = residual(sys, x) == std::vector<std::int64_t>(sys.m, 0);
        for (const auto& step : s.steps) ok = ok && solve_direct(parse_system_tokens(step, p)) == x;
        const LinearSystem fin = parse_system_tokens(s.answer, p);
        ok = ok && residual(sys, fin.b) == std::vector<std::int64_t>(sys.m, 0);
        if (!ok) ++eq_bad;
    }

    Rng rl(103);
    for (int k = 0; k < 2000; ++k) {
        std::vector<std::int64_t> seq(1 + rl.below(12));
        for (auto& v : seq) v = rl.range(1, 8);
        if (lis_dp(seq).answer != lis_brute(seq)) ++lis_bad;
    }

    Rng rd(104);
    for (int k = 0; k < 2000; ++k) {
        std::string a, b;
        const std::size_t la = rd.below(9), lb = rd.below(9);
        for (std::size_t i = 0; i < la; ++i) a.push_back(static_cast<char>('a' + rd.below(3)));
        for (std::size_t i = 0; i < lb; ++i) b.push_back(static_cast<char>('a' + rd.below(3)));
        if (ed_dp(a, b).answer != ed_brute(a, b)) ++ed_bad;
    }

    Rng rc(105);
    for (int k = 0; k < 1000; ++k) {
        const Cfg g = random_cfg(rc);
        std::vector<int> w(rc.below(7));
        for (auto& c : w) c = static_cast<int>(rc.below(2));
        if (cfg_membership(g, w).first != cfg_brute(g, w)) ++cfg_bad;
    }

    const double s = since(t0);
    const std::size_t bad = arith_bad + eq_bad + lis_bad + ed_bad + cfg_bad;
    verdict(bad == 0 && s < 120, "oracle equivalence",
            fmt::format("disagreements: arithmetic {}/10000, equation {}/5000, LIS {}/2000, ED {}/2000, CFG {}/1000",
                        arith_bad, eq_bad, lis_bad, ed_bad, cfg_bad),
            s);
}

// Lemmas -------------------------------------------------------------------------

void lemmas() {
    const auto t0 = Clock::now();
    LemmaOptions o;
    o.eps = 1e-3;
    o.trials = 1000;
    o.seq_len = 32;
    o.seed = 1;
    const LemmaReport r = certify_lemmas(o);
    // Multiplication is also certified at the looser grid tolerance 1e-2.
    LemmaOptions loose = o;
    loose.eps = 1e-2;
    const LemmaReport r2 = certify_lemmas(loose);
    std::string detail;
    bool ok = r.ok() && r2.ok();
    for (const auto& c : r.checks) detail += fmt::format("{} {:.1e}, ", c.name, c.measured);
    detail += fmt::format("mult at eps 1e-2: {:.1e}", r2.checks.front().measured);
    const double s = since(t0);
    verdict(ok && s < 60, "lemma certification", detail, s);
}

// Constructions ------------------------------------------------------------------------

void constructions(bool long_run) {
    const auto t0 = Clock::now();
    const ModelSpec arith = build_arithmetic_model(64, 11, 0.25);
    VerifyOptions o;
    o.trials = 500;
    o.seed = 1;
    o.max_ops = 7;
    const VerifyReport ra = verify(arith, o);
    const bool arith_ok = ra.ok() && arith.magnitude_bound == 64.0 * 64.0;
    const double s_arith = since(t0);

    const auto t1 = Clock::now();
    const ModelSpec eq = build_equation_model(3, 5);
    VerifyOptions oe;
    oe.trials = 100;
    oe.seed = 1;
    oe.max_vars = 3;
    const VerifyReport re = verify(eq, oe);
    bool localized = true;
    for (const auto& f : re.failures) localized = localized && !f.diagnostics.empty();
    const bool eq_ok = re.final_mismatches == 0 && localized && re.head_failures == 0 && re.max_weight <= re.weight_bound;
    const double s = since(t0);

    verdict(arith_ok && eq_ok && s < 900, "construction verification",
            fmt::format("arithmetic n_max=64: {}/{} exact ({} traces longer than n_max), head failures {}/{}, "
                        "max|w| {:.3g} <= {:.3g}; equations p=5: final answers {}/{} exact, full traces {}/{} exact",
                        ra.trials - ra.mismatches, ra.trials, ra.too_long, ra.head_failures, ra.heads_checked,
                        ra.max_weight, ra.weight_bound, re.trials - re.final_mismatches, re.trials,
                        re.trials - re.mismatches, re.trials),
            s);
    info("arithmetic n_max=64", fmt::format("prompts whose trace fits: {}/{} exact, {:.1f}s", ra.trials - ra.mismatches,
                                            ra.trials - ra.too_long, s_arith));

    // Same prompts with room for the longest 7-operator trace.
    const auto t2 = Clock::now();
    const std::size_t fit = arithmetic_trace_bound(7);
    const ModelSpec wide = build_arithmetic_model(fit, 11, 0.25);
    const VerifyReport rw = verify(wide, o);
    info(fmt::format("arithmetic n_max={}", fit),
         fmt::format("{}/{} exact, head failures {}/{}, max|w| {:.3g} <= {:.3g}, {:.1f}s", rw.trials - rw.mismatches,
                     rw.trials, rw.head_failures, rw.heads_checked, rw.max_weight, rw.weight_bound, since(t2)));

    const auto t3 = Clock::now();
    const ModelSpec q = build_arithmetic_model(32, 11);
    VerifyOptions oq;
    oq.trials = 100;
    oq.seed = 3;
    oq.max_ops = 3;
    oq.quantize_bits = 20;
    oq.check_assumption = false;
    const VerifyReport rq = verify(q, oq);
    info("20-bit stream, n_max=32", fmt::format("{}/{} exact ({} too long), {:.1f}s", rq.trials - rq.mismatches,
                                                 rq.trials, rq.too_long, since(t3)));

    std::string gaps;
    for (std::size_t m = 1; m <= 6; ++m) gaps += fmt::format("{}{:.3g}", m == 1 ? "" : " ", equation_unembedding_gap(m));
    info("equation unembedding gap", "m=1..6: " + gaps);

    if (long_run) {
        const auto t4 = Clock::now();
        const ModelSpec e11 = build_equation_model(3, 11);
        const VerifyReport r11 = verify(e11, oe);
        info("equations p=11", fmt::format("final answers {}/{} exact, full traces {}/{}, head failures {}, {:.1f}s",
                                           r11.trials - r11.final_mismatches, r11.trials, r11.trials - r11.mismatches,
                                           r11.trials, r11.head_failures, since(t4)));
    }
}

// Reductions ------------------------------------------------------------------------------

void reductions() {
    const auto t0 = Clock::now();
    // All formulas with up to five connectives, with truth values by direct evaluation.
    std::vector<std::vector<std::pair<std::string, int>>> by(6);
    by[0] = {{"0", 0}, {"1", 1}};
    for (int k = 1; k <= 5; ++k) {
        for (const auto& [f, v] : by[static_cast<std::size_t>(k - 1)]) by[static_cast<std::size_t>(k)].push_back({"(¬" + f + ")", 1 - v});
        for (int a = 0; a < k; ++a) {
            for (const auto& [f1, v1] : by[static_cast<std::size_t>(a)]) {
                for (const auto& [f2, v2] : by[static_cast<std::size_t>(k - 1 - a)]) {
                    by[static_cast<std::size_t>(k)].push_back({"(" + f1 + "∧" + f2 + ")", v1 & v2});
                    by[static_cast<std::size_t>(k)].push_back({"(" + f1 + "∨" + f2 + ")", v1 | v2});
                }
            }
        }
    }
    const std::set<TokKind> allowed{TokKind::number, TokKind::plus, TokKind::minus, TokKind::times, TokKind::lparen,
                                    TokKind::rparen};
    std::size_t formulas = 0, bool_bad = 0;
    for (const auto& level : by) {
        for (const auto& [f, v] : level) {
            const Expr e = reduce_boolean(f);
            bool ok = evaluate(e).value() == v;
            for (const auto& t : e.tokens) ok = ok && allowed.count(t.kind) == 1 && (t.kind != TokKind::number || t.value <= 1);
            if (!ok) ++bool_bad;
            ++formulas;
        }
    }

    Rng rng(77);
    std::size_t words = 0, dfa_bad = 0;
    for (int a = 0; a < 10; ++a) {
        Automaton d;
        d.num_states = 1 + static_cast<int>(rng.below(5));
        d.num_symbols = 1 + static_cast<int>(rng.below(3));
        for (int k = 0; k < d.num_states * d.num_symbols; ++k)
            d.delta.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(d.num_states))));
        for (int q = 0; q < d.num_states; ++q) d.accept.push_back(rng.bernoulli(0.5));
        for (int w = 0; w < 100; ++w) {
            std::vector<int> word(rng.below(13));
            for (auto& c : word) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(d.num_symbols)));
            const AutomatonReduction r = reduce_automaton(d, word, 11);
            if (solve_direct(r.system)[r.x_star] != (simulate(d, word) ? 1 : 0)) ++dfa_bad;
            ++words;
        }
    }
    const double s = since(t0);
    verdict(bool_bad == 0 && dfa_bad == 0 && s < 30, "reductions",
            fmt::format("Boolean {}/{} formulas with <= 5 connectives, automata {}/{} words", formulas - bool_bad, formulas,
                        words - dfa_bad, words),
            s);
}

// Corruption ---------------------------------------------------------------------------------

void corruption_rates() {
    const auto t0 = Clock::now();
    GenConfig cfg;
    cfg.task = Task::arithmetic;
    cfg.ops = 6;
    cfg.seed = 5;
    const Tokens vocab = task_vocabulary(Task::arithmetic, 11, 0, 0);
    bool ok = true;
    std::string detail;
    for (double gamma : {0.1, 0.2, 0.3}) {
        Rng rng(static_cast<std::uint64_t>(std::lround(gamma * 100)));
        std::size_t steps = 0, omitted = 0, corrupted = 0;
        for (std::uint64_t i = 0; steps < 100000; ++i) {
            const CorruptionResult c = corrupt(gen_sample(cfg, i), gamma, vocab, rng);
            steps += c.steps;
            omitted += c.omitted;
            corrupted += c.corrupted;
        }
        const double om = static_cast<double>(omitted) / static_cast<double>(steps);
        const double co = static_cast<double>(corrupted) / static_cast<double>(steps - omitted);
        ok = ok && std::abs(om - gamma) <= 0.005 && std::abs(co - gamma) <= 0.005;
        detail += fmt::format("{}gamma {:.1f}: omitted {:.4f}, corrupted {:.4f} over {} steps", detail.empty() ? "" : "; ",
                              gamma, om, co, steps);
    }
    verdict(ok, "corruption rates", detail, since(t0));
}

// Determinism ----------------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void determinism() {
    const auto t0 = Clock::now();
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cotlab_acceptance";
    fs::create_directories(dir);
    std::ostringstream sink;
    bool ok = true;
    std::size_t files = 0;
    for (const std::string task : {"arithmetic", "equation", "lis", "ed"}) {
        auto run = [&](const std::string& name, const std::string& shards) {
            const std::string out = (dir / (task + "_" + name + ".txt")).string();
            const int code = run_cli({"gen", "--task", task, "--count", "2000", "--seed", "7", "--shards", shards, "--out",
                                      out},
                                     sink, sink);
            ok = ok && code == 0;
            return slurp(out);
        };
        const std::string first = run("a", "1"), second = run("b", "1"), sharded = run("c", "8");
        ok = ok && !first.empty() && first == second && first == sharded;
        files += 3;

        auto split = [&](const std::string& name, const std::string& shards) {
            const std::string prefix = (dir / (task + "_split_" + name)).string();
            const int code = run_cli({"gen", "--task", task, "--count", "500", "--test-count", "100", "--seed", "9",
                                      "--shards", shards, "--out", prefix},
                                     sink, sink);
            ok = ok && code == 0;
            return slurp(prefix + ".train.txt") + slurp(prefix + ".test.txt") + slurp(prefix + ".manifest.json");
        };
        ok = ok && split("a", "1") == split("b", "5");
        files += 2;
    }
    verdict(ok, "determinism", fmt::format("{} generated datasets, repeated and sharded runs byte-identical", files),
            since(t0));
}

}  // namespace

int main(int argc, char** argv) {
    bool long_run = false;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--long") long_run = true;
    }
    golden();
    oracles();
    lemmas();
    constructions(long_run);
    reductions();
    corruption_rates();
    determinism();
    std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures)) << std::endl;
    return failures;
}
