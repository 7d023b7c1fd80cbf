#include <benchmark/benchmark.h>

// The distro's static benchmark_main is LTO bytecode from another compiler
// release, so the shared library plus this main is used instead.
BENCHMARK_MAIN();
