#include <memory>

#include <benchmark/benchmark.h>

#include "redlab/bounds.hpp"
#include "redlab/coder.hpp"
#include "redlab/codecs.hpp"
#include "redlab/eval.hpp"
#include "redlab/type_classes.hpp"

using namespace redlab;

namespace {

void BM_TypeClassesMarkov(benchmark::State& state) {
    const auto f = ParamFamily::markov1(2);
    for (auto _ : state) benchmark::DoNotOptimize(TypeClassSet::enumerate(f, state.range(0)));
}
BENCHMARK(BM_TypeClassesMarkov)->Arg(16)->Arg(64)->Arg(128);

void BM_PartitionBuild(benchmark::State& state) {
    const auto g = std::make_shared<const EstimateGrid>(EstimateGrid::build(ParamFamily::memoryless(3), 6));
    for (auto _ : state) benchmark::DoNotOptimize(Partition::build(g, state.range(0)));
}
BENCHMARK(BM_PartitionBuild)->Arg(16)->Arg(64);

void BM_ExpectedRedundancy(benchmark::State& state) {
    const auto f = ParamFamily::memoryless(2);
    const auto model = LengthModel::mixture(f, state.range(0));
    const auto theta = ParamVector::bernoulli(0.2);
    for (auto _ : state) benchmark::DoNotOptimize(expected_redundancy(theta, model));
}
BENCHMARK(BM_ExpectedRedundancy)->Arg(64)->Arg(4096);

void BM_EncodeDecodeMixture(benchmark::State& state) {
    const auto f = ParamFamily::memoryless(4);
    const auto n = state.range(0);
    Rng rng(1);
    const auto x = SequenceSample(f, sample_sequence(ParamVector(f, {0.5, 0.25, 0.125, 0.125}), n, rng));
    const auto model = LengthModel::mixture(f, n);
    for (auto _ : state) {
        const auto bits = encode(x, model);
        benchmark::DoNotOptimize(decode(bits, model, n));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EncodeDecodeMixture)->Arg(1 << 10)->Arg(1 << 16);

void BM_MarkovJeffreysIntegral(benchmark::State& state) {
    IntegralOptions o;
    o.min_samples = static_cast<std::uint64_t>(state.range(0));
    o.target_rel_se = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(jeffreys_integral(ParamFamily::markov1(3), o));
}
BENCHMARK(BM_MarkovJeffreysIntegral)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
