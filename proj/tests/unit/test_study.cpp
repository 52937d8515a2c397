#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "hpot/study.hpp"
#include "oracles.hpp"

using namespace hpot;
namespace ht = hpot::testing;

TEST(Scenario, GridAndNames) {
    ScenarioSpec base;
    const auto grid = scenario_grid(base);
    ASSERT_EQ(grid.size(), 4u);
    EXPECT_EQ(grid[0].name(), "Exponential kernel, iid marks");
    EXPECT_EQ(grid[3].name(), "Mixture kernel, hier. marks");
    EXPECT_NE(grid[0].seed, grid[1].seed);
    const auto mix = reference_mixture();
    EXPECT_EQ(mix.weights, (std::vector<double>{0.7, 0.3}));
    EXPECT_EQ(mix.locations, (std::vector<double>{-0.3, 1.2}));
    EXPECT_EQ(mix.scales, (std::vector<double>{0.35, 0.45}));
    ScenarioSpec bad;
    bad.train_end = 2000.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Scenario, IidMarkMean) {
    ScenarioSpec spec;
    spec.marks = MarkTruth::iid;
    std::vector<double> marks;
    for (std::size_t r = 0; r < 60; ++r) {
        const auto d = generate_scenario(spec, r);
        marks.insert(marks.end(), d.truth.marks.begin(), d.truth.marks.end());
        for (double z : d.truth.z) EXPECT_EQ(z, 0.0);
    }
    EXPECT_LT(std::abs(ht::sample_mean(marks) - 1.0 / 0.85), 3 * ht::standard_error(marks));
}

TEST(Scenario, EventCountLaw) {
    for (auto kernel : {KernelTruth::exponential, KernelTruth::mixture}) {
        ScenarioSpec spec;
        spec.kernel = kernel;
        std::vector<double> counts;
        for (std::size_t r = 0; r < 200; ++r) counts.push_back(static_cast<double>(generate_scenario(spec, r).truth.times.size()));
        // Finite window: slightly below 0.1 * 1000 / 0.45 because late offspring fall outside.
        const double se = ht::standard_error(counts);
        EXPECT_LT(std::abs(ht::sample_mean(counts) - 222.2), 3 * se + 2.0);
    }
}

TEST(Scenario, HierarchicalSpreadGrowsWithTau) {
    auto spread = [](double tau) {
        ScenarioSpec spec;
        spec.marks = MarkTruth::hierarchical;
        spec.tau_sigma = tau;
        spec.xi = 0.0;
        std::vector<double> log_means;
        for (std::size_t r = 0; r < 20; ++r) {
            const auto d = generate_scenario(spec, r);
            const auto& part = d.truth.partition;
            for (std::size_t k = 0; k < part.cluster_count(); ++k) {
                const auto [a, b] = part.range(k);
                double s = 0.0;
                for (std::size_t i = a; i < b; ++i) s += d.truth.marks[i];
                log_means.push_back(std::log(s / static_cast<double>(b - a)));
            }
        }
        return ht::sample_var(log_means);
    };
    const double v0 = spread(0.0);
    const double v1 = spread(1.0);
    EXPECT_GT(v0, 0.0);
    EXPECT_GT(v1, v0 + 0.5);
}

TEST(Scenario, TruthRecordRoundTrip) {
    ScenarioSpec spec;
    spec.kernel = KernelTruth::mixture;
    spec.marks = MarkTruth::hierarchical;
    const auto d = generate_scenario(spec, 3);
    const auto& t = d.truth;
    ASSERT_EQ(t.z.size(), t.partition.cluster_count());
    double ll = 0.0;
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        const double sigma = t.sigma0 * std::exp(t.tau_sigma * t.z[t.partition.assignment[i]]);
        ll += ht::gpd_logpdf_ref(t.marks[i], sigma, t.xi);
    }
    EXPECT_NEAR(truth_mark_loglik(t), ll, 1e-10);
    EXPECT_EQ(d.train.size() + d.test.size(), t.times.size());
    EXPECT_EQ(d.train.threshold, 0.0);
    EXPECT_EQ(d.train.scale_factor, 1.0);
    EXPECT_EQ(d.test.window_start, spec.train_end);
    EXPECT_FALSE(d.test.empty());
    for (double x : d.train.times) EXPECT_LE(x, spec.train_end);
    const auto again = generate_scenario(spec, 3);
    EXPECT_EQ(again.truth.times, t.times);
    EXPECT_EQ(again.truth.marks, t.marks);
}

TEST(Scenario, RegeneratesEmptyTestWindows) {
    ScenarioSpec spec;
    spec.mu = 0.002;
    spec.kappa = 0.1;
    spec.T = 100.0;
    spec.train_end = 95.0;
    std::size_t regenerated = 0;
    for (std::size_t r = 0; r < 10; ++r) {
        const auto d = generate_scenario(spec, r);
        EXPECT_FALSE(d.test.empty());
        EXPECT_FALSE(d.train.empty());
        regenerated += d.truth.regenerations;
    }
    EXPECT_GT(regenerated, 0u);
}

TEST(Study, TinyRunIsReproducibleAndBaselineDeltaIsZero) {
    ScenarioSpec spec;
    spec.T = 150.0;
    spec.train_end = 120.0;
    spec.mu = 0.3;
    spec.replicates = 2;
    spec.seed = 5;
    ScoringConfig cfg;
    cfg.priors.dp.truncation = 40;
    cfg.chain.iterations = 120;
    cfg.chain.burn_in = 40;
    cfg.chain.chains = 1;
    cfg.mark_chain.iterations = 120;
    cfg.mark_chain.warmup = 40;
    cfg.mark_chain.chains = 1;
    cfg.mark_chain.keep = 4;
    cfg.representative_draws = 3;
    cfg.score_draws = 20;
    cfg.z_draws = 4;
    const std::vector<ScenarioSpec> scenarios{spec};
    const auto a = run_study(scenarios, cfg);
    const auto b = run_study(scenarios, cfg);
    ASSERT_EQ(a.scenarios.size(), 1u);
    const auto& reps = a.scenarios[0].replicates;
    ASSERT_EQ(reps.size(), 2u);
    for (const auto& r : reps) {
        ASSERT_TRUE(r.completed) << r.error;
        ASSERT_EQ(r.reports.size(), 4u);
        EXPECT_EQ(r.reports[0].delta, 0.0);
    }
    EXPECT_EQ(a.scenarios[0].cells[0].mean_delta, 0.0);
    std::ostringstream sa;
    std::ostringstream sb;
    write_study_csv(sa, a);
    write_study_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
    std::ostringstream summary;
    write_study_summary(summary, a);
    EXPECT_NE(summary.str().find("DP+hier_mean"), std::string::npos);
}

TEST(Study, CellSummaryStatistics) {
    std::vector<ReplicateResult> reps(3);
    const double deltas[3] = {1.0, 2.0, 4.0};
    for (std::size_t r = 0; r < 3; ++r) {
        reps[r].completed = true;
        for (const auto& m : model_grid()) {
            ScoreReport s;
            s.spec = m;
            s.delta = m == model_grid()[0] ? 0.0 : deltas[r];
            reps[r].reports.push_back(s);
        }
    }
    reps.push_back(ReplicateResult{});  // failed replicate is excluded
    const auto cells = summarise_cells(reps);
    ASSERT_EQ(cells.size(), 4u);
    EXPECT_EQ(cells[1].completed, 3u);
    EXPECT_NEAR(cells[1].mean_delta, 7.0 / 3.0, 1e-12);
    EXPECT_NEAR(cells[1].se_delta, std::sqrt((1.0 / 9 * 16 + 1.0 / 9 + 25.0 / 9) / 2.0 / 3.0), 1e-12);
    EXPECT_EQ(cells[0].se_delta, 0.0);
}
