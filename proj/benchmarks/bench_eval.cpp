#include <benchmark/benchmark.h>

#include <random>

#include "neuromix/baselines.hpp"
#include "neuromix/data.hpp"
#include "neuromix/metrics.hpp"

using namespace neuromix;

namespace {

void BM_Hungarian(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::vector<std::vector<double>> cost(k, std::vector<double>(k));
    for (auto& row : cost)
        for (auto& v : row) v = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(hungarian(cost).cost);
}
BENCHMARK(BM_Hungarian)->Arg(10)->Arg(50)->Arg(200);

void BM_KMeans(benchmark::State& state) {
    const Dataset d = make_blobs(10, static_cast<std::size_t>(state.range(0)), 8.0, 0);
    for (auto _ : state) benchmark::DoNotOptimize(kmeans(d.samples, 10, 1).inertia);
}
BENCHMARK(BM_KMeans)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GmmEm(benchmark::State& state) {
    const Dataset d = make_blobs(10, 1000, 8.0, 0);
    for (auto _ : state) benchmark::DoNotOptimize(gmm_em(d.samples, 10, 1).log_likelihood.back());
}
BENCHMARK(BM_GmmEm)->Unit(benchmark::kMillisecond);

}  // namespace
