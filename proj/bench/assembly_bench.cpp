// Serial reference against the OpenMP assembly, same panels and rule.
#include <benchmark/benchmark.h>

#include "capbem/assembly.hpp"
#include "capbem/mesh.hpp"

namespace {

const capbem::PanelSystem& panels(int subdiv)
{
    static const capbem::PanelSystem levels[] = {
        capbem::build_panels(capbem::make_icosphere(1.0, 1)),
        capbem::build_panels(capbem::make_icosphere(1.0, 2)),
        capbem::build_panels(capbem::make_icosphere(1.0, 3)),
    };
    return levels[subdiv - 1];
}

void BM_AssembleSerial(benchmark::State& state)
{
    const auto& ps = panels(static_cast<int>(state.range(0)));
    const auto rule = capbem::QuadratureRule::triangle(4);
    for (auto _ : state)
        benchmark::DoNotOptimize(capbem::assemble_serial(ps, rule).matrix().data());
    state.counters["panels"] = static_cast<double>(ps.size());
}

void BM_AssembleParallel(benchmark::State& state)
{
    const auto& ps = panels(static_cast<int>(state.range(0)));
    const auto rule = capbem::QuadratureRule::triangle(4);
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state)
        benchmark::DoNotOptimize(capbem::assemble(ps, rule, {.threads = threads}).matrix().data());
    state.counters["panels"] = static_cast<double>(ps.size());
    state.counters["threads"] = threads;
}

} // namespace

BENCHMARK(BM_AssembleSerial)->DenseRange(1, 3)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AssembleParallel)
    ->ArgsProduct({{1, 2, 3}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
