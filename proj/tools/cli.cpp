#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cotlab/arith.hpp"
#include "cotlab/certify.hpp"
#include "cotlab/datagen.hpp"
#include "cotlab/dp.hpp"
#include "cotlab/equation.hpp"
#include "cotlab/errors.hpp"
#include "cotlab/model.hpp"

namespace cotlab {

namespace {

using nlohmann::json;

class VerificationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

// Writes to the file if a path is given, else to out.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw IoError("cannot open " + path + " for writing");
        }
        os_ = path.empty() ? &fallback : &file_;
    }
    std::ostream& operator*() { return *os_; }
    void close() {
        if (file_.is_open()) {
            file_.close();
            if (!file_) throw IoError("write failed");
        }
    }

private:
    std::ofstream file_;
    std::ostream* os_;
};

Format format_from_name(const std::string& f) { return f == "direct" ? Format::direct : Format::cot; }

const std::vector<std::string> kTasks{"arithmetic", "equation", "lis", "ed"};

// gen ------------------------------------------------------------------------

struct GenArgs {
    std::string task = "arithmetic";
    std::int64_t p = 11;
    std::size_t ops = 6, vars = 3, length = 16, count = 1000, test_count = 0, shards = 1;
    std::string format = "cot";
    std::uint64_t seed = 0;
    std::string out;
    bool jsonl = false;
};

void run_gen(const GenArgs& a, std::ostream& out) {
    GenConfig cfg;
    cfg.task = task_from_name(a.task);
    cfg.p = a.p;
    cfg.ops = a.ops;
    cfg.vars = a.vars;
    cfg.length = a.length;
    cfg.count = a.count;
    cfg.test_count = a.test_count;
    cfg.seed = a.seed;
    cfg.format = format_from_name(a.format);
    cfg.validate();
    if (a.test_count > 0) {
        const DatasetSummary s = build_dataset(cfg, a.out, a.shards);
        out << "train: " << s.train_written << " lines -> " << a.out << ".train.txt\n";
        out << "test: " << s.test_written << " lines -> " << a.out << ".test.txt\n";
        out << "removed_duplicates: " << s.removed_duplicates << "\n";
        return;
    }
    const std::size_t shards = std::clamp<std::size_t>(a.shards, 1, std::max<std::size_t>(a.count, 1));
    std::vector<std::vector<std::string>> parts(shards);
    auto work = [&](std::size_t k) {
        parts[k] = gen_lines(cfg, a.count * k / shards, a.count * (k + 1) / shards, a.jsonl);
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < shards; ++k) pool.emplace_back(work, k);
    work(0);
    for (auto& t : pool) t.join();
    Sink sink(a.out, out);
    std::size_t n = 0;
    for (const auto& part : parts) {
        for (const auto& l : part) {
            *sink << l << '\n';
            ++n;
        }
    }
    sink.close();
    if (!a.out.empty()) out << "wrote " << n << " lines to " << a.out << "\n";
}

// solve ----------------------------------------------------------------------

CotSample solve_problem(Task task, const std::string& line, std::int64_t p) {
    Tokens toks = split_ws(line);
    if (task == Task::arithmetic) {
        Expr e;
        if (toks.size() == 1) {
            std::string text = toks[0];
            if (text.find('=') == std::string::npos) text += "=";
            e = parse_compact(text, p);
        } else {
            const auto eq = std::find(toks.begin(), toks.end(), "=");
            Tokens head(toks.begin(), eq);
            head.emplace_back("=");
            e = parse_tokens(head, p);
        }
        return cot_trace(e);
    }
    const auto sep = std::find(toks.begin(), toks.end(), kSep);
    const Tokens problem(toks.begin(), sep);
    if (problem.empty()) throw ParseError("empty problem", 0);
    switch (task) {
        case Task::equation:
            return gauss_trace(parse_system_tokens(problem, p));
        case Task::lis: {
            std::vector<std::int64_t> seq;
            for (std::size_t i = 0; i < problem.size(); ++i) {
                try {
                    std::size_t used = 0;
                    seq.push_back(std::stoll(problem[i], &used));
                    if (used != problem[i].size()) throw ParseError("not an integer", i);
                } catch (const std::logic_error&) {
                    throw ParseError("not an integer", i);
                }
            }
            return lis_sample(seq);
        }
        case Task::ed: {
            const auto bar = std::find(problem.begin(), problem.end(), "|");
            if (bar == problem.end()) throw ParseError("expected '|' between the two strings", problem.size());
            std::string s1, s2;
            for (auto it = problem.begin(); it != bar; ++it) s1 += *it;
            for (auto it = bar + 1; it != problem.end(); ++it) s2 += *it;
            return ed_sample(s1, s2);
        }
        default:
            break;
    }
    throw Error("unsupported task");
}

struct SolveArgs {
    std::string task = "arithmetic";
    std::int64_t p = 11;
    std::string in, out, format = "cot";
};

void run_solve(const SolveArgs& a, std::ostream& out) {
    const Task task = task_from_name(a.task);
    const Format f = format_from_name(a.format);
    const auto lines = read_lines(a.in);
    Sink sink(a.out, out);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (split_ws(lines[i]).empty()) continue;
        try {
            *sink << plain_line(solve_problem(task, lines[i], a.p), f) << '\n';
        } catch (const Error& e) {
            throw Error(a.in + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    sink.close();
}

// corrupt --------------------------------------------------------------------

struct CorruptArgs {
    std::string task = "arithmetic";
    double gamma = 0.1;
    std::uint64_t seed = 0;
    std::int64_t p = 11;
    std::size_t vars = 3, length = 16;
    std::string in, out;
};

void run_corrupt(const CorruptArgs& a, std::ostream& out) {
    const Task task = task_from_name(a.task);
    if (!(a.gamma >= 0 && a.gamma <= 1)) throw Error("--gamma must lie in [0, 1]");
    const Tokens vocab = task_vocabulary(task, a.p, a.vars, a.length);
    const auto lines = read_lines(a.in);
    std::size_t steps = 0, omitted = 0, corrupted = 0, n = 0;
    std::vector<std::string> result;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (split_ws(lines[i]).empty()) continue;
        CotSample s;
        try {
            s = parse_sample(task, lines[i]);
        } catch (const Error& e) {
            throw Error(a.in + ":" + std::to_string(i + 1) + ": " + e.what());
        }
        Rng rng(derive_seed(a.seed, i));
        const CorruptionResult r = corrupt(s, a.gamma, vocab, rng);
        steps += r.steps;
        omitted += r.omitted;
        corrupted += r.corrupted;
        result.push_back(plain_line(r.sample, Format::cot));
        ++n;
    }
    Sink sink(a.out, out);
    for (const auto& l : result) *sink << l << '\n';
    sink.close();
    if (!a.out.empty()) {
        out << "samples: " << n << "\nsteps: " << steps << "\nomitted: " << omitted << "\ncorrupted: " << corrupted
            << "\n";
    }
}

// reduce ---------------------------------------------------------------------

struct ReduceArgs {
    std::string from;
    std::vector<std::string> formulas;
    std::string in, dfa, out;
    std::vector<int> word;
    std::size_t words = 0, max_len = 8;
    int states = 3, symbols = 2;
    std::int64_t p = 11;
    std::uint64_t seed = 0;
    bool seeded = false;
};

Automaton read_automaton(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    Automaton d;
    try {
        const auto& delta = j.at("delta");
        d.num_states = static_cast<int>(delta.size());
        d.num_symbols = d.num_states > 0 ? static_cast<int>(delta.at(0).size()) : 0;
        for (const auto& row : delta) {
            if (static_cast<int>(row.size()) != d.num_symbols) throw Error("transition rows differ in length");
            for (const auto& q : row) d.delta.push_back(q.get<int>());
        }
        d.accept.assign(static_cast<std::size_t>(d.num_states), false);
        for (const auto& q : j.at("accept")) {
            const int s = q.get<int>();
            if (s < 0 || s >= d.num_states) throw Error("accepting state out of range");
            d.accept[static_cast<std::size_t>(s)] = true;
        }
        d.q0 = j.value("start", 0);
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    d.validate();
    return d;
}

Automaton random_automaton(int states, int symbols, Rng& rng) {
    if (states < 1 || symbols < 1) throw Error("--states and --symbols must be positive");
    Automaton d;
    d.num_states = states;
    d.num_symbols = symbols;
    for (int k = 0; k < states * symbols; ++k) d.delta.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(states))));
    for (int q = 0; q < states; ++q) d.accept.push_back(rng.bernoulli(0.5));
    return d;
}

void run_reduce(const ReduceArgs& a, std::ostream& out) {
    Sink sink(a.out, out);
    bool all_ok = true;
    if (a.from == "boolean") {
        std::vector<std::string> formulas = a.formulas;
        if (!a.in.empty()) {
            for (auto& l : read_lines(a.in)) {
                if (!split_ws(l).empty()) formulas.push_back(l);
            }
        }
        if (formulas.empty()) throw Error("give --formula or --in");
        for (const auto& f : formulas) {
            const Expr e = reduce_boolean(f, a.p);
            const auto v = evaluate(e).value();
            const int truth = eval_boolean(f);
            all_ok = all_ok && v == truth;
            *sink << f << '\t' << render(e) << '\t' << v << '\n';
        }
    } else {
        Automaton d;
        Rng rng(a.seed);
        if (!a.dfa.empty()) {
            d = read_automaton(a.dfa);
        } else {
            if (!a.seeded) throw Error("a random automaton needs --seed");
            d = random_automaton(a.states, a.symbols, rng);
        }
        std::vector<std::vector<int>> words;
        if (!a.word.empty() || a.words == 0) words.push_back(a.word);
        if (a.words > 0 && !a.seeded) throw Error("random words need --seed");
        for (std::size_t k = 0; k < a.words; ++k) {
            std::vector<int> w(rng.below(a.max_len + 1));
            for (auto& c : w) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(d.num_symbols)));
            words.push_back(std::move(w));
        }
        for (const auto& w : words) {
            for (int c : w) {
                if (c < 0 || c >= d.num_symbols) throw Error("word symbol out of range");
            }
            const AutomatonReduction r = reduce_automaton(d, w, a.p);
            const auto x = solve_direct(r.system)[r.x_star];
            const int acc = simulate(d, w) ? 1 : 0;
            all_ok = all_ok && x == acc;
            std::string ws;
            for (int c : w) ws += (ws.empty() ? "" : " ") + std::to_string(c);
            *sink << "word=" << ws << "\tx*=" << variable_token(r.x_star) << "\tsolved=" << x << "\taccept=" << acc
                  << '\t' << render_system_text(r.system) << '\n';
        }
    }
    sink.close();
    if (!all_ok) throw VerificationFailed("reduction disagrees with direct evaluation");
}

// verify-lemmas --------------------------------------------------------------

void write_report(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << text;
}

struct LemmaArgs {
    double eps = 1e-3;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::string report;
};

void run_verify_lemmas(const LemmaArgs& a, std::ostream& out) {
    if (!(a.eps > 0 && a.eps < 1)) throw Error("--eps must lie in (0, 1)");
    LemmaOptions o;
    o.eps = a.eps;
    o.trials = a.trials;
    o.seed = a.seed;
    const LemmaReport r = certify_lemmas(o);
    const std::string text = r.to_text() + "status: " + (r.ok() ? "ok" : "failed") + "\n";
    out << text;
    write_report(a.report, text);
    if (!r.ok()) throw VerificationFailed("lemma certification failed");
}

// verify-construction -----------------------------------------------------------

struct ConstructionArgs {
    std::string task = "arithmetic";
    std::int64_t p = 11;
    std::size_t max_ops = 7, vars = 3, n_max = 0, trials = 100;
    std::uint64_t seed = 0;
    int quantize_bits = 0;
    bool long_run = false, skip_heads = false;
    std::string report, save;
};

void run_verify_construction(const ConstructionArgs& a, std::ostream& out) {
    ModelSpec m;
    if (a.quantize_bits < 0 || a.quantize_bits > 52) throw Error("--quantize-bits must lie in [0, 52]");
    VerifyOptions o;
    o.trials = a.trials;
    o.seed = a.seed;
    o.max_ops = a.max_ops;
    o.max_vars = a.vars;
    o.quantize_bits = a.quantize_bits;
    o.check_assumption = !a.skip_heads;
    if (a.task == "arithmetic") {
        if (a.max_ops < 1) throw Error("--max-ops must be positive");
        m = build_arithmetic_model(a.n_max ? a.n_max : std::max<std::size_t>(64, arithmetic_trace_bound(a.max_ops)), a.p);
    } else {
        if (a.p > 5 && !a.long_run) throw Error("equation models with p > 5 take long to verify; pass --long");
        if (a.vars < 1) throw Error("--vars must be positive");
        m = build_equation_model(a.vars, a.p, 0.25, a.n_max);
    }
    if (!a.save.empty()) save_model(m, a.save);
    const VerifyReport r = verify(m, o);
    std::ostringstream head;
    head << "task: " << a.task << "\np: " << a.p << "\nn_max: " << m.n_max << "\nseed: " << a.seed << "\n";
    const std::string text = head.str() + r.to_text();
    out << text;
    write_report(a.report, text);
    const bool ok = a.quantize_bits > 0 ? r.mismatches == 0 && r.max_weight <= r.weight_bound : r.ok();
    if (!ok) throw VerificationFailed("construction verification failed");
}

// stats ----------------------------------------------------------------------

Tokens answer_of(Task task, const std::string& line) {
    Tokens toks = split_ws(line);
    const auto eos = std::find(toks.begin(), toks.end(), kEos);
    toks.erase(eos, toks.end());
    const std::string delim(step_delimiter(task));
    const auto last = std::find(toks.rbegin(), toks.rend(), delim);
    return Tokens(last.base(), toks.end());
}

struct StatsArgs {
    std::string task = "arithmetic";
    std::string in, predictions, out;
};

void run_stats(const StatsArgs& a, std::ostream& out) {
    const Task task = task_from_name(a.task);
    std::vector<std::string> lines;
    for (auto& l : read_lines(a.in)) {
        if (!split_ws(l).empty()) lines.push_back(std::move(l));
    }
    json j;
    j["task"] = a.task;
    j["samples"] = lines.size();
    std::size_t total_tokens = 0, max_tokens = 0, total_steps = 0, with_eos = 0;
    for (const auto& l : lines) {
        const Tokens t = split_ws(l);
        total_tokens += t.size();
        max_tokens = std::max(max_tokens, t.size());
        if (!t.empty() && t.back() == kEos) ++with_eos;
        const CotSample s = parse_sample(task, l);
        total_steps += s.intermediate_count();
    }
    const double n = std::max<double>(1, static_cast<double>(lines.size()));
    j["mean_tokens"] = static_cast<double>(total_tokens) / n;
    j["max_tokens"] = max_tokens;
    j["mean_intermediate_steps"] = static_cast<double>(total_steps) / n;
    j["lines_ending_in_eos"] = with_eos;
    if (!a.predictions.empty()) {
        std::vector<std::string> preds = read_lines(a.predictions);
        while (!preds.empty() && split_ws(preds.back()).empty()) preds.pop_back();
        if (preds.size() != lines.size()) {
            throw Error("predictions file has " + std::to_string(preds.size()) + " lines, dataset has " +
                        std::to_string(lines.size()));
        }
        std::size_t correct = 0;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (answer_of(task, preds[i]) == answer_of(task, lines[i])) ++correct;
        }
        j["correct"] = correct;
        j["accuracy"] = static_cast<double>(correct) / n;
    }
    Sink sink(a.out, out);
    *sink << j.dump(2) << '\n';
    sink.close();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Chain-of-thought datasets, oracle solvers and verified transformer constructions", "cotlab"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a dataset");
    g->add_option("--task", gen.task, "arithmetic | equation | lis | ed")->check(CLI::IsMember(kTasks))->capture_default_str();
    g->add_option("--p", gen.p, "Prime modulus")->capture_default_str();
    g->add_option("--ops", gen.ops, "Arithmetic operator count")->capture_default_str();
    g->add_option("--vars", gen.vars, "Equation variable count")->capture_default_str();
    g->add_option("--length", gen.length, "LIS sequence length or ED first-string length")->capture_default_str();
    g->add_option("--count", gen.count, "Training samples")->capture_default_str();
    g->add_option("--test-count", gen.test_count, "Held-out samples; when positive --out is a file prefix")
        ->capture_default_str();
    g->add_option("--format", gen.format, "cot | direct")->check(CLI::IsMember({"cot", "direct"}))->capture_default_str();
    g->add_option("--seed", gen.seed, "Root seed")->required();
    g->add_option("--out", gen.out, "Output file (stdout if absent)");
    g->add_option("--shards", gen.shards, "Generation threads; output does not depend on it")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    g->add_flag("--jsonl", gen.jsonl, "Write structured JSON lines instead of plain text");

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Emit oracle traces for a file of problems");
    s->add_option("--task", solve.task, "arithmetic | equation | lis | ed")->check(CLI::IsMember(kTasks))->capture_default_str();
    s->add_option("--p", solve.p, "Prime modulus")->capture_default_str();
    s->add_option("--in", solve.in, "Problems, one per line; dataset lines are accepted too")->required();
    s->add_option("--out", solve.out, "Output file (stdout if absent)");
    s->add_option("--format", solve.format, "cot | direct")->check(CLI::IsMember({"cot", "direct"}))->capture_default_str();

    CorruptArgs cor;
    auto* c = app.add_subcommand("corrupt", "Omit and corrupt intermediate steps of a CoT dataset");
    c->add_option("--task", cor.task, "arithmetic | equation | lis | ed")->check(CLI::IsMember(kTasks))->capture_default_str();
    c->add_option("--gamma", cor.gamma, "Omission and corruption probability per step")->capture_default_str();
    c->add_option("--seed", cor.seed, "Root seed")->required();
    c->add_option("--in", cor.in, "Input dataset")->required();
    c->add_option("--out", cor.out, "Output file (stdout if absent)");
    c->add_option("--p", cor.p, "Prime modulus of the replacement vocabulary")->capture_default_str();
    c->add_option("--vars", cor.vars, "Variable count of the replacement vocabulary")->capture_default_str();
    c->add_option("--length", cor.length, "Length parameter of the replacement vocabulary")->capture_default_str();

    ReduceArgs red;
    auto* r = app.add_subcommand("reduce", "Reduce Boolean formulas to arithmetic or automata to linear systems");
    r->add_option("--from", red.from, "boolean | automaton")->check(CLI::IsMember({"boolean", "automaton"}))->required();
    r->add_option("--formula", red.formulas, "Boolean formula such as \"(1∧(¬0))\"; repeatable");
    r->add_option("--in", red.in, "File of Boolean formulas, one per line");
    r->add_option("--dfa", red.dfa, "Automaton JSON: {\"delta\": [[...]], \"accept\": [...], \"start\": 0}");
    r->add_option("--word", red.word, "Input word as symbol indices");
    r->add_option("--words", red.words, "Random words to reduce")->capture_default_str();
    r->add_option("--max-len", red.max_len, "Longest random word")->capture_default_str();
    r->add_option("--states", red.states, "States of a random automaton")->capture_default_str();
    r->add_option("--symbols", red.symbols, "Symbols of a random automaton")->capture_default_str();
    r->add_option("--p", red.p, "Prime modulus")->capture_default_str();
    auto* red_seed = r->add_option("--seed", red.seed, "Seed for random automata and words");
    r->add_option("--out", red.out, "Output file (stdout if absent)");

    LemmaArgs lem;
    auto* l = app.add_subcommand("verify-lemmas", "Certify the MLP and attention gadgets empirically");
    l->add_option("--eps", lem.eps, "Target error of every gadget")->capture_default_str();
    l->add_option("--trials", lem.trials, "Random samples per check")->capture_default_str();
    l->add_option("--seed", lem.seed, "Root seed")->required();
    l->add_option("--report", lem.report, "Also write the report here");

    ConstructionArgs con;
    auto* v = app.add_subcommand("verify-construction", "Build a constructed model and decode random prompts");
    v->add_option("--task", con.task, "arithmetic | equation")->check(CLI::IsMember({"arithmetic", "equation"}))->capture_default_str();
    v->add_option("--p", con.p, "Prime modulus")->capture_default_str();
    v->add_option("--max-ops", con.max_ops, "Largest operator count of arithmetic prompts")->capture_default_str();
    v->add_option("--vars", con.vars, "Largest variable count of equation prompts")->capture_default_str();
    v->add_option("--n-max", con.n_max, "Maximum sequence length; 0 fits the longest trace of the requested size")->capture_default_str();
    v->add_option("--trials", con.trials, "Random prompts")->capture_default_str();
    v->add_option("--seed", con.seed, "Root seed")->required();
    v->add_option("--quantize-bits", con.quantize_bits, "Mantissa bits of the residual stream (0 keeps doubles)")
        ->capture_default_str();
    v->add_flag("--long", con.long_run, "Allow long-running configurations such as equations with p > 5");
    v->add_flag("--skip-head-check", con.skip_heads, "Do not run the attention gap checker");
    v->add_option("--report", con.report, "Also write the report here");
    v->add_option("--save-weights", con.save, "Write the weight bundle here");

    StatsArgs st;
    auto* t = app.add_subcommand("stats", "Summarize a dataset and score a predictions file");
    t->add_option("--task", st.task, "arithmetic | equation | lis | ed")->check(CLI::IsMember(kTasks))->capture_default_str();
    t->add_option("--in", st.in, "Dataset file")->required();
    t->add_option("--predictions", st.predictions, "One decoded line per dataset line");
    t->add_option("--out", st.out, "Output file (stdout if absent)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: " << e.what() << "\n\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kExitUsage;
    }

    try {
        if (g->parsed()) run_gen(gen, out);
        if (s->parsed()) run_solve(solve, out);
        if (c->parsed()) run_corrupt(cor, out);
        if (r->parsed()) {
            red.seeded = red_seed->count() > 0;
            run_reduce(red, out);
        }
        if (l->parsed()) run_verify_lemmas(lem, out);
        if (v->parsed()) run_verify_construction(con, out);
        if (t->parsed()) run_stats(st, out);
    } catch (const VerificationFailed& e) {
        err << "verification failed: " << e.what() << "\n";
        return kExitVerify;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}

}  // namespace cotlab
