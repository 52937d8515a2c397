#include <benchmark/benchmark.h>

#include <vector>

#include "hpot/dp_kernel.hpp"
#include "hpot/hawkes.hpp"
#include "hpot/marks.hpp"
#include "hpot/mcmc.hpp"
#include "hpot/predict.hpp"
#include "hpot/study.hpp"

namespace {

using namespace hpot;

SimulatedSeries series_with(double T, const TriggeringKernel& kernel) {
    Rng rng(7);
    return simulate(HawkesParams{0.10, 0.55, kernel}, T, rng);
}

void BM_BranchingSweep(benchmark::State& state) {
    const double T = static_cast<double>(state.range(0));
    const auto sim = series_with(T, ExponentialKernel{1.0});
    const HawkesParams p{0.10, 0.55, ExponentialKernel{1.0}};
    Rng rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(sample_branching(sim.times, p, rng));
    state.counters["events"] = static_cast<double>(sim.times.size());
}
BENCHMARK(BM_BranchingSweep)->Arg(1000)->Arg(4000);

void BM_BranchingSweepMixture(benchmark::State& state) {
    const auto sim = series_with(1000.0, reference_mixture());
    const HawkesParams p{0.10, 0.55, reference_mixture()};
    Rng rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(sample_branching(sim.times, p, rng));
}
BENCHMARK(BM_BranchingSweepMixture);

void BM_MixtureDensity(benchmark::State& state) {
    DpConfig cfg;
    cfg.truncation = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    const CompiledKernel k(prior_dp_draw(0.5, cfg, rng));
    double x = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(k.density(x));
        x = x < 20.0 ? x * 1.01 : 0.01;
    }
}
BENCHMARK(BM_MixtureDensity)->Arg(100)->Arg(1000);

void BM_DpKernelStep(benchmark::State& state) {
    const auto sim = series_with(1000.0, reference_mixture());
    const auto lags = triggering_lags(sim.branching, sim.times);
    DpConfig cfg;
    cfg.truncation = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    CrpState crp;
    crp.labels.assign(lags.size(), kUnseated);
    LognormalMixture current = prior_dp_draw(0.5, cfg, rng);
    for (auto _ : state) {
        auto step = sample_kernel_dp(sim.branching, sim.times, 0.55, 1000.0, crp, cfg, 0.5, current, rng);
        crp = std::move(step.crp);
        current = std::move(step.kernel);
    }
    state.counters["lags"] = static_cast<double>(lags.size());
}
BENCHMARK(BM_DpKernelStep)->Arg(100)->Arg(1000);

void BM_MarkSampler(benchmark::State& state) {
    const auto sim = series_with(1000.0, ExponentialKernel{1.0});
    const auto part = clusters_from_branching(sim.branching, sim.times, 1000.0);
    Rng rng(5);
    std::vector<double> y(sim.times.size());
    for (double& v : y) v = gpd_sample({1.0, 0.15}, rng);
    MarkChainConfig cfg;
    cfg.iterations = 200;
    cfg.warmup = 100;
    cfg.chains = 1;
    cfg.keep = 10;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_mark_posterior(y, part, GpdPriors{}, MarkModel::hierarchical, cfg, ++seed));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.iterations));
}
BENCHMARK(BM_MarkSampler)->Unit(benchmark::kMillisecond);

void BM_TimeScore(benchmark::State& state) {
    const auto sim = series_with(1000.0, reference_mixture());
    std::vector<double> train;
    std::vector<double> test;
    for (double t : sim.times) (t <= 800.0 ? train : test).push_back(t);
    const HawkesParams p{0.10, 0.55, reference_mixture()};
    for (auto _ : state) benchmark::DoNotOptimize(path_time_loglik(p, train, test, 800.0, 1000.0));
}
BENCHMARK(BM_TimeScore);

}  // namespace

BENCHMARK_MAIN();
