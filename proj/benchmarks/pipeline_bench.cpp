#include <benchmark/benchmark.h>

#include "rvvgen/c_emitter.hpp"
#include "rvvgen/kernel_builder.hpp"
#include "rvvgen/lowering.hpp"

namespace {

rvvgen::KernelConfig config_from(const benchmark::State& state) {
  rvvgen::KernelConfig c;
  c.mr = static_cast<int>(state.range(0));
  c.nr = static_cast<int>(state.range(1));
  c.vlen_bits = static_cast<int>(state.range(2));
  return c;
}

void BM_BuildMicrokernel(benchmark::State& state) {
  auto config = config_from(state);
  for (auto _ : state) benchmark::DoNotOptimize(rvvgen::build_microkernel(config));
}
BENCHMARK(BM_BuildMicrokernel)->Args({8, 4, 256})->Args({20, 6, 128})->Args({16, 15, 256});

void BM_LowerMicrokernel(benchmark::State& state) {
  auto built = rvvgen::build_microkernel(config_from(state));
  for (auto _ : state) {
    auto r = rvvgen::lowering::run_pipeline(built);
    benchmark::DoNotOptimize(r.rewrites_applied);
  }
}
BENCHMARK(BM_LowerMicrokernel)->Args({8, 4, 256})->Args({20, 6, 128})->Args({16, 15, 256});

void BM_EmitMicrokernel(benchmark::State& state) {
  auto lowered = rvvgen::lowering::run_pipeline(rvvgen::build_microkernel(config_from(state)));
  for (auto _ : state) benchmark::DoNotOptimize(rvvgen::emit::emit_c(lowered.module).text);
}
BENCHMARK(BM_EmitMicrokernel)->Args({8, 4, 256})->Args({20, 6, 128})->Args({16, 15, 256});

// Whole family: build, lower and emit one translation unit.
void BM_KernelFamily(benchmark::State& state) {
  auto config = config_from(state);
  for (auto _ : state) {
    std::vector<std::pair<rvvgen::KernelConfig, rvvgen::ir::Module>> lowered;
    for (auto& [cfg, m] : rvvgen::build_family(config))
      lowered.emplace_back(cfg, rvvgen::lowering::run_pipeline(std::move(m)).module);
    benchmark::DoNotOptimize(rvvgen::emit::emit_kernel_set(lowered).text);
  }
  state.SetItemsProcessed(state.iterations() * config.mr * config.nr);
}
BENCHMARK(BM_KernelFamily)->Args({8, 4, 256})->Args({20, 6, 128})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
