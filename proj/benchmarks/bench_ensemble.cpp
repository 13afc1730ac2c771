#include <metarec/ensemble.hpp>
#include <metarec/random.hpp>
#include <metarec/stats.hpp>
#include <metarec/synthetic.hpp>

#include <benchmark/benchmark.h>

using namespace metarec;

namespace {

// Built once; generating the corpus dominates everything measured below.
const MetaCorpus& corpus()
{
    static const MetaCorpus c = build_synthetic_corpus(40, 5);
    return c;
}

void BM_Kappa(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    std::vector<int> a(n), b(n), truth(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        truth[i] = static_cast<int>(rng.index(3));
        a[i] = static_cast<int>(rng.index(3));
        b[i] = static_cast<int>(rng.index(3));
    }
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(kappa(build_contingency(a, b, truth, 3)));
    }
}
BENCHMARK(BM_Kappa)->Arg(100)->Arg(10000);

void BM_DiversityThreshold(benchmark::State& state)
{
    std::size_t n = 10;
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(diversity_threshold(n, 0.05));
        n = n == 1000 ? 10 : n + 1;
    }
}
BENCHMARK(BM_DiversityThreshold);

void BM_TrainEnsemble(benchmark::State& state)
{
    const auto& c = corpus();
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(train_ensemble(c.features, c.targets, {}));
    }
}
BENCHMARK(BM_TrainEnsemble)->Unit(benchmark::kMillisecond);

void BM_Recommend(benchmark::State& state)
{
    const auto& c = corpus();
    const auto ensemble = train_ensemble(c.features, c.targets, {});
    std::size_t i = 0;
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(ensemble.recommend(c.features[i]));
        i = (i + 1) % c.features.size();
    }
}
BENCHMARK(BM_Recommend);

} // namespace

BENCHMARK_MAIN();
