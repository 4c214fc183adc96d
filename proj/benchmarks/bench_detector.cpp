#include <benchmark/benchmark.h>

#include "srlood/detector.hpp"
#include "srlood/rng.hpp"

using namespace srlood;

namespace {

std::vector<Tensor> random_features(std::size_t n, std::size_t d, Rng& rng) {
    std::vector<Tensor> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Tensor t({d});
        for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
        out.push_back(std::move(t));
    }
    return out;
}

void DetectorFit(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    Rng rng(7);
    const auto feats = random_features(100, d, rng);
    std::vector<int> labels;
    for (std::size_t i = 0; i < feats.size(); ++i) labels.push_back(static_cast<int>(i % 4));
    for (auto _ : state) {
        detector::Detector det = detector::fit(feats, labels, 4);
        benchmark::DoNotOptimize(det.cov_pinv);
    }
}
BENCHMARK(DetectorFit)->Arg(128)->Arg(256)->Arg(384);

void ScoreMaha(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    Rng rng(7);
    const auto feats = random_features(100, d, rng);
    std::vector<int> labels;
    for (std::size_t i = 0; i < feats.size(); ++i) labels.push_back(static_cast<int>(i % 4));
    const detector::Detector det = detector::fit(feats, labels, 4);
    const auto probes = random_features(64, d, rng);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(detector::score_maha(det, probes[i++ % probes.size()]).value);
    }
}
BENCHMARK(ScoreMaha)->Arg(128)->Arg(256)->Arg(384);

void ScoreCosine(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    Rng rng(7);
    const auto feats = random_features(400, d, rng);
    std::vector<int> labels;
    for (std::size_t i = 0; i < feats.size(); ++i) labels.push_back(static_cast<int>(i % 4));
    const detector::Detector det = detector::fit(feats, labels, 4);
    const auto probes = random_features(64, d, rng);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(detector::score_cosine(det, probes[i++ % probes.size()]).value);
    }
}
BENCHMARK(ScoreCosine)->Arg(128)->Arg(384);

}  // namespace
