#include <benchmark/benchmark.h>

#include <random>

#include "neuromix/augment.hpp"
#include "neuromix/data.hpp"
#include "neuromix/session.hpp"

using namespace neuromix;

namespace {

Tensor uniform_batch(const Shape& s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Tensor t(s);
    for (auto& v : t.data()) v = u(rng);
    return t;
}

SessionConfig head(std::size_t k) {
    SessionConfig c;
    c.head.clusters = k;
    return c;
}

void BM_EmStepMlp(benchmark::State& state) {
    Model model = Model::build(parse_arch("F32 F32 F10", {2}), 0);
    ClusterSession session(model, head(10), AdamConfig{.lr = 1e-3});
    const Tensor batch = uniform_batch({128, 2}, 1);
    for (auto _ : state) benchmark::DoNotOptimize(session.em_step(batch).loss_em);
}
BENCHMARK(BM_EmStepMlp);

// One Algorithm-style step on the MNIST network: arg 0 is em-only (fold 1
// with the transformed batch), arg 1 is the full two-fold step.
void BM_MnistStep(benchmark::State& state) {
    Model model = Model::build(parse_arch(state.range(1) ? "C64 M C128 M C256 F32 F10" : "C32 M C64 F10", {2, 28, 28}), 0);
    ClusterSession session(model, head(10), AdamConfig{.lr = 5e-5}, AdamConfig{.lr = 1e-4});
    const Tensor batch = uniform_batch({128, 2, 28, 28}, 1), tr = uniform_batch({128, 2, 28, 28}, 2);
    for (auto _ : state) {
        if (state.range(0)) {
            benchmark::DoNotOptimize(session.two_fold_step(batch, tr).loss_kl);
        } else {
            benchmark::DoNotOptimize(session.em_step(batch, tr).loss_em);
        }
    }
}
BENCHMARK(BM_MnistStep)->ArgNames({"two_fold", "full_arch"})->Args({0, 1})->Args({1, 1})->Args({1, 0})
    ->Unit(benchmark::kMillisecond);

void BM_SobelAugment(benchmark::State& state) {
    Dataset d;
    d.kind = DataKind::image;
    d.samples = uniform_batch({128, 1, 28, 28}, 3);
    std::size_t epoch = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sobel_dataset(augment_dataset(d, {}, 1, epoch++)).samples.raw());
}
BENCHMARK(BM_SobelAugment)->Unit(benchmark::kMillisecond);

}  // namespace
