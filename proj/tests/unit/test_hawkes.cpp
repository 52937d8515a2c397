#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "hpot/hawkes.hpp"
#include "hpot/numeric.hpp"
#include "hpot/study.hpp"
#include "oracles.hpp"

using namespace hpot;
namespace ht = hpot::testing;

namespace {

HawkesParams exp_params(double mu, double kappa, double beta) {
    return HawkesParams{mu, kappa, ExponentialKernel{beta}};
}

LognormalMixture random_mixture(Rng& rng, std::size_t k) {
    LognormalMixture m;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        m.weights.push_back(rng.uniform(0.1, 1.0));
        total += m.weights.back();
        m.locations.push_back(rng.uniform(-1.0, 1.5));
        m.scales.push_back(rng.uniform(0.2, 1.0));
    }
    for (double& w : m.weights) w /= total;
    return m;
}

}  // namespace

TEST(MixtureKernel, StandardLognormalAtOne) {
    LognormalMixture m{{1.0}, {0.0}, {1.0}, 0};
    EXPECT_NEAR(mixture_density(1.0, m), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(mixture_cdf(std::exp(0.0), m), 0.5, 1e-15);
    EXPECT_THROW((void)mixture_density(0.0, m), std::domain_error);
    EXPECT_EQ(mixture_cdf(-1.0, m), 0.0);
}

TEST(MixtureKernel, MedianOfSingleComponent) {
    LognormalMixture m{{1.0}, {0.7}, {0.3}, 0};
    EXPECT_NEAR(mixture_cdf(std::exp(0.7), m), 0.5, 1e-15);
}

TEST(MixtureKernel, IntegratesToOneAndDerivativeMatches) {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = random_mixture(rng, 1 + trial % 4);
        // Integrate on the log scale where the integrand is smooth.
        const double total = ht::simpson([&](double u) { return mixture_density(std::exp(u), m) * std::exp(u); },
                                         -15.0, 15.0, 20000);
        EXPECT_NEAR(total, 1.0, 1e-6);
        for (int k = 0; k < 20; ++k) {
            const double x = std::exp(rng.uniform(-1.5, 2.0));
            const double h = 1e-6 * x;
            const double fd = (mixture_cdf(x + h, m) - mixture_cdf(x - h, m)) / (2 * h);
            EXPECT_NEAR(fd, mixture_density(x, m), 1e-5 * std::max(1.0, mixture_density(x, m)));
        }
        EXPECT_NEAR(mixture_cdf(1e12, m), 1.0, 1e-12);
    }
}

TEST(MixtureKernel, ReferenceMixtureDominatedByFirstComponent) {
    const auto m = reference_mixture();
    const double x = std::exp(-0.3);
    const double first = 0.7 * std::exp(normal_logpdf(-0.3, -0.3, 0.35)) / x;
    EXPECT_GT(first / mixture_density(x, m), 0.99);
}

TEST(CompiledKernel, AgreesWithDirectEvaluation) {
    Rng rng(12);
    const auto m = random_mixture(rng, 3);
    const CompiledKernel ck(m);
    const CompiledKernel ce(ExponentialKernel{2.0});
    for (double x : {0.01, 0.3, 1.0, 4.0, 20.0}) {
        EXPECT_NEAR(ck.density(x), mixture_density(x, m), 1e-13);
        EXPECT_NEAR(ck.cdf(x), mixture_cdf(x, m), 1e-13);
        EXPECT_NEAR(ce.density(x), 2.0 * std::exp(-2.0 * x), 1e-13);
        EXPECT_NEAR(ce.cdf(x), 1.0 - std::exp(-2.0 * x), 1e-13);
    }
    EXPECT_EQ(ck.density(0.0), 0.0);
    EXPECT_EQ(ck.cdf(-1.0), 0.0);
}

TEST(CompiledKernel, TruncatedSamplingMatchesConditionalLaw) {
    Rng rng(99);
    const auto m = reference_mixture();
    const CompiledKernel ck(m);
    const double lo = 0.5;
    const double hi = 3.0;
    std::vector<double> draws(40000);
    for (double& d : draws) d = ck.sample(lo, hi, rng);
    const double mass = ck.mass(lo, hi);
    EXPECT_LT(ht::ks_distance(draws, [&](double x) { return (ck.cdf(x) - ck.cdf(lo)) / mass; }), 0.01);
    for (double d : draws) {
        EXPECT_GT(d, lo);
        EXPECT_LE(d, hi);
    }
    const CompiledKernel ce(ExponentialKernel{1.5});
    for (double& d : draws) d = ce.sample(0.2, std::numeric_limits<double>::infinity(), rng);
    EXPECT_LT(ht::ks_distance(draws, [&](double x) { return 1.0 - std::exp(-1.5 * (x - 0.2)); }), 0.01);
}

TEST(Intensity, Examples) {
    const auto p = exp_params(1.0, 0.5, 1.0);
    EXPECT_EQ(intensity(3.0, {}, p), 1.0);
    const std::vector<double> h{0.0};
    EXPECT_NEAR(intensity(1.0, h, p), 1.0 + 0.5 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(intensity(1.0, h, p), 1.18394, 1e-5);
    const std::vector<double> many{0.1, 0.2, 0.5};
    EXPECT_EQ(intensity(1.0, many, exp_params(1.0, 0.0, 1.0)), 1.0);
}

TEST(Compensator, Examples) {
    EXPECT_EQ(compensator(10.0, std::vector<double>{1, 2, 3}, exp_params(1.0, 0.0, 1.0)), 10.0);
    EXPECT_NEAR(compensator(1e6, std::vector<double>{0.0}, exp_params(0.0, 0.5, 1.0)), 0.5, 1e-12);
    EXPECT_NEAR(compensator(3.0, std::vector<double>{1.0}, exp_params(1.0, 0.5, 2.0)), 3.0 + 0.5 * (1.0 - std::exp(-4.0)),
                1e-14);
    EXPECT_NEAR(compensator(3.0, std::vector<double>{1.0}, exp_params(1.0, 0.5, 2.0)), 3.49084, 1e-5);
}

TEST(Compensator, MatchesQuadratureOfIntensity) {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 1 + rng.index(20);
        const double T = 10.0;
        std::vector<double> ev(n);
        for (double& t : ev) t = rng.uniform(0.0, T);
        std::sort(ev.begin(), ev.end());
        HawkesParams p = exp_params(rng.uniform(0.1, 2.0), rng.uniform(0.1, 0.9), rng.uniform(0.5, 3.0));
        if (trial % 2) p.kernel = random_mixture(rng, 2);
        // Integrate piecewise between events, where the intensity is smooth.
        std::vector<double> knots{0.0};
        knots.insert(knots.end(), ev.begin(), ev.end());
        knots.push_back(T);
        double q = 0.0;
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            if (knots[k + 1] <= knots[k]) continue;
            q += ht::simpson(
                [&](double t) {
                    // Right limit on the piece: every event at or before its left knot counts.
                    double lam = p.mu;
                    for (double s : ev) {
                        if (s > knots[k]) break;
                        const double lag = t - s;
                        if (const auto* e = std::get_if<ExponentialKernel>(&p.kernel)) {
                            lam += p.kappa * e->rate * std::exp(-e->rate * lag);
                        } else if (lag > 0.0) {
                            lam += p.kappa * kernel_density(p.kernel, lag);
                        }
                    }
                    return lam;
                },
                knots[k], knots[k + 1], 4000);
        }
        const double c = compensator(T, ev, p);
        EXPECT_LT(std::abs(q - c) / c, 1e-6);
    }
}

TEST(LoglikConditional, SingleEvent) {
    const auto p = exp_params(0.3, 0.4, 2.0);
    const std::vector<double> ev{2.0};
    const auto b = BranchingStructure::from_one_based(std::vector<int>{0});
    EXPECT_NEAR(loglik_conditional(b, ev, 5.0, p), std::log(0.3) - 0.3 * 5.0 - 0.4 * (1.0 - std::exp(-6.0)), 1e-14);
}

TEST(LoglikConditional, PoissonLimit) {
    const std::vector<double> ev{0.5, 1.5, 2.5, 3.0};
    const auto b = BranchingStructure::from_one_based(std::vector<int>{0, 0, 0, 0});
    const double ll = loglik_conditional(b, ev, 4.0, exp_params(0.7, 1e-14, 1.0));
    EXPECT_NEAR(ll, 4.0 * std::log(0.7) - 0.7 * 4.0, 1e-10);
}

TEST(LoglikConditional, FigureTwoBranching) {
    const std::vector<double> t{1.0, 1.4, 2.0, 5.0, 5.5, 6.1};
    const auto b = BranchingStructure::from_one_based(std::vector<int>{0, 1, 1, 0, 4, 5});
    EXPECT_EQ(b.background_count(), 2u);
    const auto off = b.offspring_counts();
    EXPECT_EQ(off, (std::vector<std::size_t>{2, 0, 0, 1, 1, 0}));
    const auto p = exp_params(0.2, 0.6, 1.3);
    const double T = 8.0;
    double expected = 2 * std::log(p.mu) - p.mu * T;
    for (std::size_t j = 0; j < t.size(); ++j) {
        expected += static_cast<double>(off[j]) * std::log(p.kappa) - p.kappa * (1 - std::exp(-1.3 * (T - t[j])));
    }
    for (double lag : {t[1] - t[0], t[2] - t[0], t[4] - t[3], t[5] - t[4]}) {
        expected += std::log(1.3) - 1.3 * lag;
    }
    EXPECT_NEAR(loglik_conditional(b, t, T, p), expected, 1e-12);
    const auto c = clusters_from_branching(b, t, T);
    ASSERT_EQ(c.cluster_count(), 2u);
    EXPECT_EQ(c.range(0), (std::pair<std::size_t, std::size_t>{0, 3}));
    EXPECT_EQ(c.range(1), (std::pair<std::size_t, std::size_t>{3, 6}));
}

TEST(LoglikConditional, NonPositiveLagRejected) {
    const std::vector<double> t{1.0, 1.0};
    BranchingStructure b;
    b.parents = {kBackground, 0};
    EXPECT_THROW((void)loglik_conditional(b, t, 2.0, exp_params(1, 0.5, 1)), std::invalid_argument);
}

TEST(LoglikConditional, BruteForceMarginalEqualsUnconditional) {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> t{rng.uniform(0, 1), 0, 0};
        t[1] = t[0] + rng.uniform(0.01, 1.0);
        t[2] = t[1] + rng.uniform(0.01, 1.0);
        const double T = t[2] + rng.uniform(0.0, 2.0);
        HawkesParams p = exp_params(rng.uniform(0.1, 2.0), rng.uniform(0.05, 0.95), rng.uniform(0.3, 3.0));
        if (trial % 2) p.kernel = random_mixture(rng, 2);
        std::vector<double> terms;
        for (int b2 : {0, 1}) {
            for (int b3 : {0, 1, 2}) {
                const auto b = BranchingStructure::from_one_based(std::vector<int>{0, b2, b3});
                terms.push_back(loglik_conditional(b, t, T, p));
            }
        }
        ASSERT_EQ(terms.size(), 6u);
        EXPECT_NEAR(log_sum_exp(terms), loglik_unconditional(t, T, p), 1e-8);
    }
}

TEST(Simulate, PurePoissonCounts) {
    Rng rng(1);
    std::vector<double> counts;
    for (int r = 0; r < 500; ++r) counts.push_back(static_cast<double>(simulate(exp_params(2.0, 0.0, 1.0), 100.0, rng).times.size()));
    EXPECT_LT(std::abs(ht::sample_mean(counts) - 200.0), 3.0 * std::sqrt(200.0 / 500.0));
}

TEST(Simulate, BranchingCountLaw) {
    Rng rng(2);
    const auto p = exp_params(0.10, 0.55, 1.0);
    std::vector<double> counts;
    for (int r = 0; r < 200; ++r) counts.push_back(static_cast<double>(simulate(p, 1000.0, rng).times.size()));
    EXPECT_LT(std::abs(ht::sample_mean(counts) - 0.1 * 1000.0 / 0.45), 3.0 * ht::standard_error(counts));
}

TEST(Simulate, EmptyWindow) {
    Rng rng(3);
    EXPECT_TRUE(simulate(exp_params(1.0, 0.5, 1.0), 0.0, rng).times.empty());
}

TEST(Simulate, ReproducibleAndStructurallyValid) {
    HawkesParams p{0.5, 0.7, reference_mixture()};
    Rng a(42);
    Rng b(42);
    const auto s1 = simulate(p, 200.0, a);
    const auto s2 = simulate(p, 200.0, b);
    EXPECT_EQ(s1.times, s2.times);
    EXPECT_EQ(s1.branching.parents, s2.branching.parents);
    ASSERT_FALSE(s1.times.empty());
    EXPECT_EQ(s1.branching.parents.front(), kBackground);
    for (std::size_t i = 0; i < s1.times.size(); ++i) {
        if (i) EXPECT_GT(s1.times[i], s1.times[i - 1]);
        const auto par = s1.branching.parents[i];
        if (par != kBackground) {
            ASSERT_LT(static_cast<std::size_t>(par), i);
            EXPECT_GT(kernel_density(p.kernel, s1.times[i] - s1.times[par]), 0.0);
        }
        EXPECT_LE(s1.times[i], 200.0);
    }
    EXPECT_NO_THROW(s1.branching.validate(s1.times));
}

TEST(Simulate, HistoryOffspringStayInsideWindow) {
    // With mu = 0 every event descends from the history.
    const std::vector<double> history{0.0, 0.5};
    Rng rng(8);
    std::size_t total = 0;
    for (int r = 0; r < 2000; ++r) {
        const auto path = simulate(exp_params(0.0, 0.8, 1.0), 1.0, 3.0, history, rng);
        for (std::size_t i = 0; i < path.times.size(); ++i) {
            EXPECT_GT(path.times[i], 1.0);
            EXPECT_LE(path.times[i], 3.0);
            EXPECT_NE(path.parents[i], kBackground);
        }
        total += path.times.size();
    }
    // Direct offspring expectation: kappa * sum_j [H(3 - t_j) - H(1 - t_j)], plus descendants.
    const double direct = 0.8 * ((std::exp(-1.0) - std::exp(-3.0)) + (std::exp(-0.5) - std::exp(-2.5)));
    EXPECT_GT(static_cast<double>(total) / 2000.0, direct * 0.95);
}

TEST(Clusters, PartitionProperties) {
    const std::vector<double> t{1, 2, 3, 4, 5};
    const auto all_bg = BranchingStructure::from_one_based(std::vector<int>{0, 0, 0, 0, 0});
    EXPECT_EQ(clusters_from_branching(all_bg, t, 6.0).cluster_count(), 5u);
    const auto chain = BranchingStructure::from_one_based(std::vector<int>{0, 1, 1, 1, 1});
    const auto one = clusters_from_branching(chain, t, 6.0);
    EXPECT_EQ(one.cluster_count(), 1u);
    for (auto a : one.assignment) EXPECT_EQ(a, 0u);

    Rng rng(5);
    const auto sim = simulate(exp_params(0.2, 0.6, 1.0), 300.0, rng);
    const auto part = clusters_from_branching(sim.branching, sim.times, 300.0);
    EXPECT_EQ(part.cluster_count(), sim.branching.background_count());
    std::size_t covered = 0;
    for (std::size_t k = 0; k < part.cluster_count(); ++k) {
        const auto [a, b] = part.range(k);
        EXPECT_EQ(sim.branching.parents[a], kBackground);
        for (std::size_t i = a; i < b; ++i) EXPECT_EQ(part.assignment[i], k);
        covered += b - a;
    }
    EXPECT_EQ(covered, sim.times.size());
}

TEST(Branching, OneBasedRoundTrip) {
    const std::vector<int> raw{0, 1, 1, 0, 4, 5};
    EXPECT_EQ(BranchingStructure::from_one_based(raw).to_one_based(), raw);
}
