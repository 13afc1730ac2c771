#include <metarec/metafeatures.hpp>
#include <metarec/synthetic.hpp>

#include <benchmark/benchmark.h>

using namespace metarec;

namespace {

TabularDataset problem(std::size_t instances)
{
    SyntheticSpec spec;
    spec.instances = instances;
    spec.numeric = 6;
    spec.nominal = 2;
    spec.missing_rate = 0.02;
    return synthetic_problem(spec, 3);
}

void BM_Statistical(benchmark::State& state)
{
    const auto d = problem(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(extract_statistical(d));
    }
}
BENCHMARK(BM_Statistical)->Arg(200)->Arg(2000);

void BM_Landmarking(benchmark::State& state)
{
    const auto d = problem(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(extract_landmarking(d, 1));
    }
}
BENCHMARK(BM_Landmarking)->Arg(200)->Arg(1000);

void BM_Complexity(benchmark::State& state)
{
    const auto d = problem(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(extract_complexity(d, 1));
    }
}
BENCHMARK(BM_Complexity)->Arg(200)->Arg(2000);

void BM_ExtractAll(benchmark::State& state)
{
    const auto d = problem(500);
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(extract_all(d, 1));
    }
}
BENCHMARK(BM_ExtractAll);

} // namespace

BENCHMARK_MAIN();
