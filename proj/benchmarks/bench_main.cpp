#include <benchmark/benchmark.h>

#include "cotlab/arith.hpp"
#include "cotlab/datagen.hpp"
#include "cotlab/dp.hpp"
#include "cotlab/equation.hpp"
#include "cotlab/model.hpp"

using namespace cotlab;

static void BM_ArithmeticTrace(benchmark::State& st) {
    Rng rng(1);
    const Expr e = gen_arithmetic(static_cast<std::size_t>(st.range(0)), 11, rng).expr;
    for (auto _ : st) benchmark::DoNotOptimize(cot_trace(e));
}
BENCHMARK(BM_ArithmeticTrace)->Arg(6)->Arg(15);

static void BM_GaussTrace(benchmark::State& st) {
    Rng rng(2);
    const LinearSystem s = gen_equation(static_cast<std::size_t>(st.range(0)), 11, rng);
    for (auto _ : st) benchmark::DoNotOptimize(gauss_trace(s));
}
BENCHMARK(BM_GaussTrace)->Arg(3)->Arg(5);

static void BM_LisDp(benchmark::State& st) {
    Rng rng(3);
    const LisInstance inst = gen_lis(static_cast<std::size_t>(st.range(0)), rng);
    for (auto _ : st) benchmark::DoNotOptimize(lis_dp(inst.seq));
}
BENCHMARK(BM_LisDp)->Arg(16)->Arg(100);

static void BM_EdDp(benchmark::State& st) {
    Rng rng(4);
    const EdInstance inst = gen_ed(static_cast<std::size_t>(st.range(0)), rng);
    for (auto _ : st) benchmark::DoNotOptimize(ed_dp(inst.s1, inst.s2));
}
BENCHMARK(BM_EdDp)->Arg(16)->Arg(40);

static void BM_GenDataset(benchmark::State& st) {
    GenConfig cfg;
    cfg.ops = 6;
    cfg.seed = 5;
    for (auto _ : st) benchmark::DoNotOptimize(gen_samples(cfg, 1000, static_cast<std::size_t>(st.range(0))));
    st.SetItemsProcessed(st.iterations() * 1000);
}
BENCHMARK(BM_GenDataset)->Arg(1)->Arg(4)->UseRealTime();

static void BM_BuildArithmeticModel(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(build_arithmetic_model(static_cast<std::size_t>(st.range(0)), 11));
}
BENCHMARK(BM_BuildArithmeticModel)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_DecodeArithmetic(benchmark::State& st) {
    const ModelSpec m = build_arithmetic_model(64, 11);
    const Tokens prompt = to_tokens(parse_compact("1+5×(1−2)=", 11));
    std::size_t tokens = 0;
    for (auto _ : st) {
        const DecodeResult r = decode(m, prompt, 20);
        tokens += r.output.size();
    }
    st.SetItemsProcessed(static_cast<std::int64_t>(tokens));
}
BENCHMARK(BM_DecodeArithmetic)->Unit(benchmark::kMillisecond);

static void BM_DecodeEquation(benchmark::State& st) {
    const ModelSpec m = build_equation_model(3, 5);
    const CotSample s = gauss_trace(parse_system("1 x1 + 2 x2 + 3 x3 = 4 , 0 x1 + 1 x2 + 4 x3 = 2 , 3 x1 + 0 x2 + 1 x3 = 1 ,", 5));
    const Tokens seq = serialize_tokens(s);
    const Tokens prompt(seq.begin(), seq.begin() + static_cast<long>(s.problem.size() + 1));
    std::size_t tokens = 0;
    for (auto _ : st) {
        const DecodeResult r = decode(m, prompt, seq.size() - prompt.size() + 1);
        tokens += r.output.size();
    }
    st.SetItemsProcessed(static_cast<std::int64_t>(tokens));
}
BENCHMARK(BM_DecodeEquation)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
