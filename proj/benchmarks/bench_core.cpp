#include <benchmark/benchmark.h>

#include "prsclt/asymptotics.hpp"
#include "prsclt/estimators.hpp"
#include "prsclt/simulate.hpp"
#include "prsclt/stieltjes.hpp"

using namespace prsclt;

static void BM_StieltjesSolve(benchmark::State& state) {
    const auto cov = build_covariance(Ar1Cov{0.5}, static_cast<int>(state.range(0)), FirstM{0});
    for (auto _ : state) benchmark::DoNotOptimize(solve_fixed_point(cov, 0.5, 1.0).m_value);
}
BENCHMARK(BM_StieltjesSolve)->Arg(200)->Arg(1000);

static void BM_RidgeFit(benchmark::State& state) {
    const auto n = state.range(0);
    Dataset d;
    d.design = gen_raw_entries(n, n / 2, EntryDist{}, 1);
    d.response = gen_raw_entries(n, 1, EntryDist{}, 2).col(0);
    for (auto _ : state) benchmark::DoNotOptimize(fit_ridge(d, 1.0).beta_hat.data());
}
BENCHMARK(BM_RidgeFit)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_MarginalAccuracyLaw(benchmark::State& state) {
    const auto cov = build_covariance(Ar1Cov{0.5}, 500, FirstM{250});
    PopulationParams pp;
    pp.n = 1000;
    pp.n_z = 500;
    pp.p = 500;
    pp.m = 250;
    for (auto _ : state) benchmark::DoNotOptimize(marginal_accuracy(cov, pp).center);
}
BENCHMARK(BM_MarginalAccuracyLaw)->Unit(benchmark::kMillisecond);

static void BM_Replication(benchmark::State& state) {
    SimConfig c;
    c.params.n = 1000;
    c.params.n_z = 500;
    c.params.p = 500;
    c.params.m = 250;
    c.mask_spec = FirstM{250};
    c.estimator = static_cast<EstimatorKind>(state.range(0));
    c.params.n_w = 800;
    c.replications = 1;
    c.workers = 1;
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(c).raw.front());
    state.SetLabel(to_string(c.estimator));
}
BENCHMARK(BM_Replication)
    ->Arg(static_cast<int>(EstimatorKind::marginal))
    ->Arg(static_cast<int>(EstimatorKind::reference_ridge))
    ->Arg(static_cast<int>(EstimatorKind::ridge))
    ->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
