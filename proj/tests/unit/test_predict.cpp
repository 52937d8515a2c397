#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hpot/errors.hpp"
#include "hpot/numeric.hpp"
#include "hpot/predict.hpp"
#include "oracles.hpp"

using namespace hpot;
namespace ht = hpot::testing;

namespace {

MarkedEventSeries history_series(std::vector<double> times, std::vector<double> excesses, double start, double end,
                                 double scale = 1.0) {
    MarkedEventSeries s;
    s.window_start = start;
    s.window_end = end;
    s.times = std::move(times);
    s.excesses = std::move(excesses);
    s.scale_factor = scale;
    return s;
}

ClusterPartition all_background(std::size_t n) {
    ClusterPartition p;
    for (std::size_t i = 0; i < n; ++i) {
        p.boundaries.push_back(i);
        p.assignment.push_back(i);
    }
    return p;
}

GpdHierState flat_state(double sigma0, double xi, std::size_t clusters) {
    GpdHierState s;
    s.log_sigma0 = std::log(sigma0);
    s.tau_sigma = 0.0;
    s.xi = xi;
    s.z.assign(clusters, 0.0);
    return s;
}

PosteriorDraw draw_of(const HawkesParams& p, std::size_t n) {
    PosteriorDraw d;
    d.hawkes = p;
    d.branching.parents.assign(n, kBackground);
    return d;
}

}  // namespace

TEST(ForwardSimulate, ZeroHorizonIsEmpty) {
    const auto hist = history_series({1.0, 2.0}, {1.0, 1.0}, 0.0, 5.0);
    Rng rng(1);
    const auto path = forward_simulate({1.0, 0.5, ExponentialKernel{1.0}}, flat_state(1.0, 0.1, 2), all_background(2), hist,
                                       0.0, rng);
    EXPECT_EQ(path.size(), 0u);
}

TEST(ForwardSimulate, NoBackgroundNoHistoryIsEmpty) {
    const auto hist = history_series({}, {}, 0.0, 5.0);
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(forward_simulate({0.0, 0.5, ExponentialKernel{1.0}}, flat_state(1.0, 0.1, 0), ClusterPartition{}, hist,
                                   10.0, rng)
                      .size(),
                  0u);
    }
}

TEST(ForwardSimulate, PoissonCountsAndGpdMarks) {
    const auto hist = history_series({3.0}, {2.0}, 0.0, 10.0, 2.0);
    const HawkesParams p{0.5, 0.0, ExponentialKernel{1.0}};
    const auto state = flat_state(1.0, 0.2, 1);
    Rng rng(3);
    const int paths = 20000;
    std::vector<double> counts;
    std::vector<double> marks;
    for (int i = 0; i < paths; ++i) {
        const auto path = forward_simulate(p, state, all_background(1), hist, 10.0, rng);
        counts.push_back(static_cast<double>(path.size()));
        for (std::size_t j = 0; j < path.size(); ++j) {
            EXPECT_GT(path.times[j], 10.0);
            EXPECT_LE(path.times[j], 20.0);
            if (j > 0) EXPECT_GT(path.times[j], path.times[j - 1]);
            EXPECT_GT(path.excesses[j], 0.0);
            EXPECT_TRUE(path.clusters[j].is_new);
            marks.push_back(path.excesses[j]);
        }
    }
    for (int k = 0; k <= 15; ++k) {
        const double pmf = ht::poisson_cdf(k, 5.0) - (k > 0 ? ht::poisson_cdf(k - 1, 5.0) : 0.0);
        const double freq = static_cast<double>(std::count(counts.begin(), counts.end(), static_cast<double>(k))) / paths;
        EXPECT_LT(std::abs(freq - pmf), 4 * std::sqrt(pmf * (1 - pmf) / paths) + 1e-4) << k;
    }
    EXPECT_NEAR(ht::sample_var(counts), 5.0, 0.15);
    EXPECT_LT(ht::ks_distance(marks, [](double y) { return ht::gpd_cdf_ref(y, 2.0, 0.2); }), 0.01);
}

TEST(ForwardSimulate, OffspringBeforeNewBackgroundContinueLastCluster) {
    const auto hist = history_series({9.9}, {1.0}, 0.0, 10.0);
    GpdHierState state;
    state.log_sigma0 = 0.0;
    state.tau_sigma = 1.0;
    state.xi = 0.1;
    state.z = {2.0};
    Rng rng(4);
    int continued = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto path = forward_simulate({0.0, 0.9, ExponentialKernel{2.0}}, state, all_background(1), hist, 5.0, rng);
        for (const auto& c : path.clusters) {
            EXPECT_FALSE(c.is_new);
            EXPECT_EQ(c.id, 0u);
            ++continued;
        }
    }
    EXPECT_GT(continued, 0);
}

TEST(Summaries, AllEmptyPaths) {
    std::vector<PredictivePath> paths(10);
    const std::vector<double> levels{0.5, 1.0};
    const auto s = predictive_summaries(paths, levels);
    EXPECT_EQ(s.nonempty_paths, 0u);
    EXPECT_TRUE(std::isnan(s.max_median));
    for (double p : s.exceedance_prob) EXPECT_EQ(p, 0.0);
    ASSERT_EQ(s.count_pmf.size(), 1u);
    EXPECT_EQ(s.count_pmf[0], 1.0);
}

TEST(Summaries, CompoundPoissonMaximum) {
    const auto hist = history_series({}, {}, 0.0, 0.0);
    const HawkesParams p{0.5, 0.0, ExponentialKernel{1.0}};
    const auto state = flat_state(1.0, 0.0, 0);
    Rng rng(5);
    std::vector<PredictivePath> paths;
    const int n = 40000;
    for (int i = 0; i < n; ++i) paths.push_back(forward_simulate(p, state, ClusterPartition{}, hist, 10.0, rng));
    const std::vector<double> levels{0.5, 1.0, 2.0, 4.0};
    const auto s = predictive_summaries(paths, levels);
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const double exact = 1.0 - std::exp(-5.0 * std::exp(-levels[l]));
        const double se = std::sqrt(exact * (1 - exact) / n);
        EXPECT_LT(std::abs(s.exceedance_prob[l] - exact), 3 * se) << levels[l];
    }
    EXPECT_NEAR(s.count_mean, 5.0, 0.05);
    double total = 0.0;
    for (double q : s.count_pmf) total += q;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LE(s.max_lower, s.max_median);
    EXPECT_LE(s.max_median, s.max_upper);
}

TEST(TimeScore, VoidProbability) {
    const HawkesParams p{0.3, 0.6, ExponentialKernel{1.5}};
    const std::vector<double> hist{1.0, 2.0, 2.5};
    const double expected = -compensator_between(3.0, 8.0, hist, p);
    EXPECT_NEAR(path_time_loglik(p, hist, {}, 3.0, 8.0), expected, 1e-12);
    // Direct: mu * 5 + kappa * sum [H(8 - t) - H(3 - t)].
    double direct = 0.3 * 5.0;
    for (double t : hist) direct += 0.6 * (std::exp(-1.5 * (3.0 - t)) - std::exp(-1.5 * (8.0 - t)));
    EXPECT_NEAR(expected, -direct, 1e-12);
}

TEST(TimeScore, SingleEventWithoutExcitation) {
    const HawkesParams p{0.4, 0.0, ExponentialKernel{1.0}};
    const std::vector<double> test{5.0};
    EXPECT_NEAR(path_time_loglik(p, {}, test, 3.0, 8.0), std::log(0.4) - 0.4 * 5.0, 1e-12);
}

TEST(TimeScore, ChainRuleIdentityAndAdditivity) {
    Rng rng(6);
    const HawkesParams p{0.4, 0.6, LognormalMixture{{0.7, 0.3}, {-0.3, 1.2}, {0.35, 0.45}, 0}};
    const auto sim = simulate(p, 60.0, rng);
    std::vector<double> hist;
    std::vector<double> test;
    std::vector<double> test_a;
    std::vector<double> test_b;
    for (double t : sim.times) {
        (t <= 40.0 ? hist : test).push_back(t);
        if (t > 40.0) (t <= 50.0 ? test_a : test_b).push_back(t);
    }
    const double whole = path_time_loglik(p, hist, test, 40.0, 60.0);
    EXPECT_NEAR(whole, loglik_unconditional(sim.times, 60.0, p) - loglik_unconditional(hist, 40.0, p), 1e-9);
    std::vector<double> hist_a = hist;
    hist_a.insert(hist_a.end(), test_a.begin(), test_a.end());
    const double split = path_time_loglik(p, hist, test_a, 40.0, 50.0) + path_time_loglik(p, hist_a, test_b, 50.0, 60.0);
    EXPECT_NEAR(whole, split, 1e-9);
}

TEST(MarkScore, FlatStateMatchesIidDensity) {
    const double c = 2.5;
    const auto train = history_series({1.0, 2.0}, {1.0, 3.0}, 0.0, 3.0, c);
    const auto test = history_series({4.0, 4.5, 6.0}, {c, 0.5, 4.0}, 3.0, 7.0, c);
    const HawkesParams p{0.3, 0.5, ExponentialKernel{1.0}};
    const auto draw = draw_of(p, 2);
    const auto state = flat_state(1.0, 0.0, 2);
    Rng rng(7);
    double expected = 0.0;
    for (double y : test.excesses) expected += ht::gpd_logpdf_ref(y / c, 1.0, 0.0) - std::log(c);
    for (int rep = 0; rep < 5; ++rep) {
        EXPECT_NEAR(mark_path_logdensity(draw, state, all_background(2), train.times, test, 32, rng), expected, 1e-12);
    }
    // y = c under GPD(1, 0): -1 - log c.
    EXPECT_NEAR(ht::gpd_logpdf_ref(c / c, 1.0, 0.0) - std::log(c), -1.0 - std::log(c), 1e-15);
}

TEST(MarkScore, ContinuesLastTrainingCluster) {
    const auto train = history_series({1.0, 2.9}, {1.0, 3.0}, 0.0, 3.0);
    const auto test = history_series({3.05}, {1.7}, 3.0, 4.0);
    const HawkesParams p{1e-300, 0.5, ExponentialKernel{1.0}};
    const auto draw = draw_of(p, 2);
    GpdHierState state;
    state.log_sigma0 = 0.1;
    state.tau_sigma = 0.7;
    state.xi = 0.2;
    state.z = {-1.0, 1.5};
    Rng rng(8);
    const double expected = ht::gpd_logpdf_ref(1.7, std::exp(0.1 + 0.7 * 1.5), 0.2);
    EXPECT_NEAR(mark_path_logdensity(draw, state, all_background(2), train.times, test, 32, rng), expected, 1e-10);
}

TEST(MarkScore, NewClusterIntegratesScale) {
    const auto train = history_series({1.0}, {1.0}, 0.0, 3.0);
    const auto test = history_series({3.5}, {1.2}, 3.0, 4.0);
    const HawkesParams p{0.5, 0.0, ExponentialKernel{1.0}};
    const auto draw = draw_of(p, 1);
    GpdHierState state;
    state.log_sigma0 = 0.0;
    state.tau_sigma = 0.6;
    state.xi = 0.1;
    state.z = {0.0};
    const double exact = std::log(ht::simpson(
        [&](double z) { return std::exp(ht::gpd_logpdf_ref(1.2, std::exp(0.6 * z), 0.1) + normal_logpdf(z, 0.0, 1.0)); },
        -9.0, 9.0, 4000));
    Rng rng(9);
    EXPECT_NEAR(mark_path_logdensity(draw, state, all_background(1), train.times, test, 50000, rng), exact, 0.01);
}

namespace {

struct Fixture {
    MarkedEventSeries train;
    MarkedEventSeries test;
};

Fixture small_data() {
    Rng rng(10);
    const auto sim = simulate(HawkesParams{0.3, 0.5, ExponentialKernel{1.0}}, 150.0, rng);
    Fixture f;
    f.train = history_series({}, {}, 0.0, 120.0, 1.0);
    f.test = history_series({}, {}, 120.0, 150.0, 1.0);
    for (double t : sim.times) {
        auto& s = t <= 120.0 ? f.train : f.test;
        s.times.push_back(t);
        s.excesses.push_back(gpd_sample({1.0, 0.1}, rng));
    }
    return f;
}

ScoringConfig tiny_config() {
    ScoringConfig cfg;
    cfg.priors.dp.truncation = 50;
    cfg.chain.iterations = 150;
    cfg.chain.burn_in = 50;
    cfg.chain.chains = 2;
    cfg.mark_chain.iterations = 150;
    cfg.mark_chain.warmup = 50;
    cfg.mark_chain.chains = 1;
    cfg.mark_chain.keep = 5;
    cfg.representative_draws = 4;
    cfg.score_draws = 50;
    cfg.z_draws = 8;
    return cfg;
}

}  // namespace

TEST(Scoring, CombinedIsSumAndDeterministic) {
    const auto f = small_data();
    ASSERT_FALSE(f.test.empty());
    const auto grid = model_grid();
    const auto cfg = tiny_config();
    const auto a = score_models(f.train, f.test, grid, cfg, 99);
    const auto b = score_models(f.train, f.test, grid, cfg, 99);
    ASSERT_EQ(a.size(), 4u);
    EXPECT_EQ(a[0].spec.name(), "Exp+iid");
    EXPECT_EQ(a[0].delta, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].combined, a[i].time.value + a[i].mark.value);
        EXPECT_NEAR(a[i].combined_se, std::hypot(a[i].time.standard_error, a[i].mark.standard_error), 1e-15);
        EXPECT_EQ(a[i].delta, a[i].combined - a[0].combined);
        EXPECT_EQ(a[i].combined, b[i].combined);
        EXPECT_EQ(a[i].test_events, f.test.size());
        EXPECT_TRUE(std::isfinite(a[i].combined));
    }
    // Models sharing a kernel share the Hawkes fit and hence the time score.
    EXPECT_EQ(a[0].time.value, a[1].time.value);
    EXPECT_EQ(a[2].time.value, a[3].time.value);
}

TEST(Scoring, EmptyTestWindowScoresVoidProbability) {
    auto f = small_data();
    f.test.times.clear();
    f.test.excesses.clear();
    const auto cfg = tiny_config();
    const ModelSpec spec{KernelModel::exponential, MarkModel::iid};
    const auto fitted = fit_model(f.train, spec, cfg, 3);
    const auto r = score_fitted(fitted, f.train, f.test, cfg, 4);
    EXPECT_EQ(r.mark.value, 0.0);
    EXPECT_LT(r.time.value, 0.0);
    EXPECT_EQ(r.combined, r.time.value);
}

TEST(Scoring, ModelNames) {
    EXPECT_EQ(parse_model("DP+hier"), (ModelSpec{KernelModel::dirichlet_process, MarkModel::hierarchical}));
    EXPECT_EQ(parse_model("Exp+iid").name(), "Exp+iid");
    EXPECT_THROW((void)parse_model("Gauss+iid"), UsageError);
}

TEST(Scoring, PredictiveSimulationFromFit) {
    const auto f = small_data();
    const auto cfg = tiny_config();
    const auto fitted = fit_model(f.train, ModelSpec{KernelModel::dirichlet_process, MarkModel::hierarchical}, cfg, 5);
    const auto a = simulate_predictive(fitted, f.train, 30.0, 200, 6);
    const auto b = simulate_predictive(fitted, f.train, 30.0, 200, 6);
    ASSERT_EQ(a.size(), 200u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].times, b[i].times);
        EXPECT_EQ(a[i].excesses, b[i].excesses);
    }
}
