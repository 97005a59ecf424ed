// Own entry point: the distro's benchmark_main archive carries LTO bytecode
// tied to a specific compiler build.
#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
