#include <benchmark/benchmark.h>

#include <random>

#include "neuromix/ops.hpp"

using namespace neuromix;

namespace {

Tensor random_tensor(const Shape& s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Tensor t(s);
    for (auto& v : t.data()) v = d(rng);
    return t;
}

// Args: batch, in channels, side, out channels.
void BM_Conv2dForward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0)), c = static_cast<std::size_t>(state.range(1)),
               s = static_cast<std::size_t>(state.range(2)), o = static_cast<std::size_t>(state.range(3));
    const Tensor x = random_tensor({n, c, s, s}, 1), w = random_tensor({o, c, 3, 3}, 2), b = random_tensor({o}, 3);
    for (auto _ : state) {
        Tape t;
        benchmark::DoNotOptimize(conv2d(t.constant_ref(x), t.constant_ref(w), t.constant_ref(b)).value().raw());
    }
    state.counters["GFLOPS"] = benchmark::Counter(2e-9 * static_cast<double>(n * o * c * 9 * s * s),
                                                  benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv2dForward)->Args({128, 2, 28, 64})->Args({128, 64, 14, 128})->Args({128, 128, 7, 256})
    ->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0)), c = static_cast<std::size_t>(state.range(1)),
               s = static_cast<std::size_t>(state.range(2)), o = static_cast<std::size_t>(state.range(3));
    const Tensor x0 = random_tensor({n, c, s, s}, 1), b0 = random_tensor({o}, 3);
    Parameter w(random_tensor({o, c, 3, 3}, 2)), b(b0);
    const Tensor probe = random_tensor({n, o, s, s}, 4);
    for (auto _ : state) {
        Tape t;
        Var y = conv2d(t.input(x0), t.parameter(w), t.parameter(b));
        t.backward(weighted_sum(probe, y));
        benchmark::DoNotOptimize(w.grad.raw());
    }
}
BENCHMARK(BM_Conv2dBackward)->Args({128, 64, 14, 128})->Args({128, 128, 7, 256})->Unit(benchmark::kMillisecond);

void BM_Dense(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0)), in = static_cast<std::size_t>(state.range(1)),
               out = static_cast<std::size_t>(state.range(2));
    const Tensor x = random_tensor({n, in}, 1), w = random_tensor({in, out}, 2), b = random_tensor({out}, 3);
    for (auto _ : state) {
        Tape t;
        benchmark::DoNotOptimize(dense(t.constant_ref(x), t.constant_ref(w), t.constant_ref(b)).value().raw());
    }
}
BENCHMARK(BM_Dense)->Args({128, 2, 32})->Args({128, 32, 32})->Args({128, 12544, 32});

void BM_MaxPool(benchmark::State& state) {
    const Tensor x = random_tensor({128, 64, 28, 28}, 1);
    for (auto _ : state) {
        Tape t;
        benchmark::DoNotOptimize(maxpool2d(t.constant_ref(x), 2).value().raw());
    }
}
BENCHMARK(BM_MaxPool)->Unit(benchmark::kMillisecond);

}  // namespace
