#include <benchmark/benchmark.h>

#include "srlood/encoder.hpp"
#include "srlood/losses.hpp"
#include "srlood/rng.hpp"

using namespace srlood;

namespace {

encoder::EncoderConfig bench_config(std::size_t d_model) {
    encoder::EncoderConfig cfg;
    cfg.vocab_size = 128;
    cfg.d_model = d_model;
    cfg.heads = 16;
    cfg.max_seq_len = 16;
    cfg.num_classes = 4;
    cfg.seed = 1;
    return cfg;
}

std::vector<std::size_t> bench_tokens() {
    return {0, 5, 9, 14, 3, 22, 31, 7, 40, 2, 11, 1};
}

void EncodeForward(benchmark::State& state) {
    const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
    const encoder::ParamStore params = encoder::init_params(cfg);
    const auto tokens = bench_tokens();
    for (auto _ : state) {
        Graph g;
        encoder::Bound b = encoder::bind_params(g, cfg, params, false);
        encoder::Encoded enc = encoder::encode(g, b, tokens);
        benchmark::DoNotOptimize(g.value(enc.h_cls));
    }
}
BENCHMARK(EncodeForward)->Arg(32)->Arg(64)->Arg(96);

void EncodeForwardBackward(benchmark::State& state) {
    const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
    const encoder::ParamStore params = encoder::init_params(cfg);
    const auto tokens = bench_tokens();
    srl::RoleSpans spans;
    spans.a0 = {1};
    spans.v = {3};
    spans.a1 = {6};
    for (auto _ : state) {
        Graph g;
        encoder::Bound b = encoder::bind_params(g, cfg, params, true);
        encoder::Encoded enc = encoder::encode(g, b, tokens);
        encoder::Representation rep = encoder::pool_and_concat(g, b, enc, spans);
        Value loss = g.cross_entropy(encoder::id_logits(g, b, rep.h), 0);
        auto grads = g.grad_of(loss);
        benchmark::DoNotOptimize(grads);
    }
}
BENCHMARK(EncodeForwardBackward)->Arg(32)->Arg(64)->Arg(96);

void MarginLossBatch(benchmark::State& state) {
    const std::size_t m = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 384;
    Rng rng(3);
    std::vector<Tensor> h;
    std::vector<int> labels;
    for (std::size_t i = 0; i < m; ++i) {
        Tensor t({d});
        for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
        h.push_back(std::move(t));
        labels.push_back(static_cast<int>(i % 4));
    }
    for (auto _ : state) {
        Graph g;
        std::vector<Value> vals;
        for (const Tensor& t : h) {
            vals.push_back(g.input(t, true));
        }
        Value loss = losses::margin_loss(g, vals, labels, 2.0 * static_cast<double>(d));
        g.backward(loss);
        benchmark::DoNotOptimize(g.grad(vals[0]));
    }
}
BENCHMARK(MarginLossBatch)->Arg(6)->Arg(12)->Arg(24);

}  // namespace
