#include <benchmark/benchmark.h>

#include "srlood/metrics.hpp"
#include "srlood/rng.hpp"

using namespace srlood;

namespace {

metrics::ScoreSample random_sample(std::size_t n, Rng& rng) {
    metrics::ScoreSample s;
    for (std::size_t i = 0; i < n; ++i) {
        s.id_scores.push_back(rng.uniform(-1.0, 1.0));
        s.ood_scores.push_back(rng.uniform(-0.5, 1.5));
    }
    return s;
}

void Auroc(benchmark::State& state) {
    Rng rng(9);
    const auto sample = random_sample(static_cast<std::size_t>(state.range(0)), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::auroc(sample));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(Auroc)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oNLogN);

void Far95(benchmark::State& state) {
    Rng rng(9);
    const auto sample = random_sample(static_cast<std::size_t>(state.range(0)), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::far95(sample).value);
    }
}
BENCHMARK(Far95)->Arg(1024)->Arg(16384);

}  // namespace
