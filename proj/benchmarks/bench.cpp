#include <benchmark/benchmark.h>

#include <vector>

#include "matchnet/distributions.hpp"
#include "matchnet/large_market.hpp"
#include "matchnet/simulator.hpp"
#include "matchnet/small_market.hpp"

using namespace matchnet;

static void BM_PoissonBinomial(benchmark::State& state) {
    std::vector<double> p(state.range(0));
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = 0.05 + 0.9 * k / p.size();
    for (auto _ : state) benchmark::DoNotOptimize(poisson_binomial_pmf(p));
}
BENCHMARK(BM_PoissonBinomial)->Arg(100)->Arg(1000)->Arg(4000);

static void BM_JobFindingExact(benchmark::State& state) {
    ApplicantLinks spec{std::vector<double>(state.range(0), 0.01), 200};
    for (auto _ : state) benchmark::DoNotOptimize(job_finding_exact(spec));
}
BENCHMARK(BM_JobFindingExact)->Arg(50)->Arg(200);

static void BM_FLargePareto(benchmark::State& state) {
    const auto G = IntensityModel::pareto(1.0, 1.5);
    for (auto _ : state) benchmark::DoNotOptimize(f_large(G, 1.0));
}
BENCHMARK(BM_FLargePareto);

static void BM_FLocations(benchmark::State& state) {
    const auto G = IntensityModel::gamma(2.0, 3.0);
    const auto H = IntensityModel::integer(DiscretePMF::point_mass(2));
    for (auto _ : state) benchmark::DoNotOptimize(f_locations_large(G, H, 1.0));
}
BENCHMARK(BM_FLocations);

static void BM_EstimateF(benchmark::State& state) {
    SimConfig c;
    c.market = LargeMarketRecipe{static_cast<std::size_t>(state.range(0)), 1.0, IntensityModel::exponential(3.0), {}, {}};
    c.replications = 4;
    for (auto _ : state) benchmark::DoNotOptimize(estimate_f(c));
    state.SetItemsProcessed(state.iterations() * c.replications * state.range(0));
}
BENCHMARK(BM_EstimateF)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
