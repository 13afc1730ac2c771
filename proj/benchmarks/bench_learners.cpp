#include <metarec/learners.hpp>
#include <metarec/synthetic.hpp>

#include <benchmark/benchmark.h>

using namespace metarec;

namespace {

TabularDataset problem(std::size_t instances)
{
    SyntheticSpec spec;
    spec.concept_kind = Concept::rules;
    spec.instances = instances;
    spec.numeric = 8;
    spec.nominal = 2;
    spec.classes = 3;
    return synthetic_problem(spec, 17);
}

void BM_TrainTree(benchmark::State& state)
{
    const auto d = problem(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(train_tree(d, {}));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TrainTree)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_NearestNeighborAccuracy(benchmark::State& state)
{
    const auto d = problem(static_cast<std::size_t>(state.range(0)));
    const auto model = train_learner(demo_candidates()[1], d);
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(accuracy(*model, d));
    }
}
BENCHMARK(BM_NearestNeighborAccuracy)->Arg(256)->Arg(1024);

} // namespace

BENCHMARK_MAIN();
