#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hpot/marks.hpp"
#include "hpot/numeric.hpp"
#include "oracles.hpp"

using namespace hpot;
namespace ht = hpot::testing;

namespace {

ClusterPartition single_cluster(std::size_t n) {
    ClusterPartition p;
    p.boundaries = {0};
    p.assignment.assign(n, 0);
    return p;
}

std::vector<double> gpd_draws(std::size_t n, double sigma, double xi, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> y(n);
    for (double& v : y) v = gpd_sample({sigma, xi}, rng);
    return y;
}

}  // namespace

TEST(MarkPosterior, SupportBoundaries) {
    const std::vector<double> y{0.5, 1.0, 2.0};
    const auto part = single_cluster(3);
    GpdPriors priors;
    GpdHierState s;
    s.z = {0.0};
    s.xi = -0.26;
    EXPECT_EQ(mark_log_posterior(s, y, part, priors, MarkModel::hierarchical), -std::numeric_limits<double>::infinity());
    s.xi = -0.2;
    s.log_sigma0 = std::log(0.3);  // y = 2 lies beyond sigma / |xi| = 1.5
    s.tau_sigma = 0.0;
    EXPECT_EQ(mark_log_posterior(s, y, part, priors, MarkModel::iid), -std::numeric_limits<double>::infinity());
    s.xi = 0.1;
    s.tau_sigma = 0.5;
    EXPECT_THROW((void)mark_log_posterior(s, y, part, priors, MarkModel::iid), std::invalid_argument);
    s.tau_sigma = -0.1;
    EXPECT_EQ(mark_log_posterior(s, y, part, priors, MarkModel::hierarchical), -std::numeric_limits<double>::infinity());
}

TEST(MarkPosterior, IidLikelihoodMatchesReference) {
    const auto y = gpd_draws(50, 1.3, 0.2, 3);
    const auto part = single_cluster(y.size());
    GpdPriors priors;
    GpdHierState s;
    s.log_sigma0 = std::log(1.1);
    s.xi = 0.25;
    s.z = {0.0};
    double ll = 0.0;
    for (double v : y) ll += ht::gpd_logpdf_ref(v, 1.1, 0.25);
    const double prior_diff_a = mark_log_posterior(s, y, part, priors, MarkModel::iid) - ll;
    s.xi = 0.1;
    double ll2 = 0.0;
    for (double v : y) ll2 += ht::gpd_logpdf_ref(v, 1.1, 0.1);
    const double prior_diff_b = mark_log_posterior(s, y, part, priors, MarkModel::iid) - ll2;
    // Differences of the prior term in xi: N(0, 0.2^2) kernel.
    EXPECT_NEAR(prior_diff_a - prior_diff_b, -(0.25 * 0.25 - 0.1 * 0.1) / (2 * 0.04), 1e-10);
}

TEST(MarkSampler, IidMatchesGridPosterior) {
    const auto y = gpd_draws(500, 1.0, 0.15, 5);
    const auto part = single_cluster(y.size());
    GpdPriors priors;

    // Grid posterior on (log sigma, xi) from the reference density.
    const int g = 160;
    double zsum = 0.0;
    double m_ls = 0.0;
    double m_xi = 0.0;
    double m_ls2 = 0.0;
    double m_xi2 = 0.0;
    std::vector<double> lp(static_cast<std::size_t>(g * g));
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            const double ls = -0.4 + 0.8 * (i + 0.5) / g;
            const double xi = -0.1 + 0.5 * (j + 0.5) / g;
            double v = -0.5 * ls * ls - 0.5 * (xi / 0.2) * (xi / 0.2);
            for (double x : y) v += ht::gpd_logpdf_ref(x, std::exp(ls), xi);
            lp[static_cast<std::size_t>(i * g + j)] = v;
            best = std::max(best, v);
        }
    }
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            const double ls = -0.4 + 0.8 * (i + 0.5) / g;
            const double xi = -0.1 + 0.5 * (j + 0.5) / g;
            const double w = std::exp(lp[static_cast<std::size_t>(i * g + j)] - best);
            zsum += w;
            m_ls += w * ls;
            m_xi += w * xi;
            m_ls2 += w * ls * ls;
            m_xi2 += w * xi * xi;
        }
    }
    m_ls /= zsum;
    m_xi /= zsum;
    const double sd_ls = std::sqrt(m_ls2 / zsum - m_ls * m_ls);
    const double sd_xi = std::sqrt(m_xi2 / zsum - m_xi * m_xi);

    MarkChainConfig cfg;
    cfg.iterations = 3000;
    cfg.warmup = 1000;
    cfg.chains = 2;
    cfg.keep = 0;
    const auto states = sample_mark_posterior(y, part, priors, MarkModel::iid, cfg, 77);
    ASSERT_EQ(states.size(), 4000u);
    std::vector<double> ls;
    std::vector<double> xi;
    for (const auto& s : states) {
        EXPECT_EQ(s.tau_sigma, 0.0);
        ls.push_back(s.log_sigma0);
        xi.push_back(s.xi);
    }
    EXPECT_NEAR(ht::sample_mean(ls), m_ls, 0.02);
    EXPECT_NEAR(ht::sample_mean(xi), m_xi, 0.02);
    EXPECT_NEAR(std::sqrt(ht::sample_var(ls)), sd_ls, 0.3 * sd_ls);
    EXPECT_NEAR(std::sqrt(ht::sample_var(xi)), sd_xi, 0.3 * sd_xi);
    EXPECT_LT(std::abs(ht::sample_mean(ls) - 0.0), 3 * sd_ls);
    EXPECT_LT(std::abs(ht::sample_mean(xi) - 0.15), 3 * sd_xi);
}

TEST(MarkSampler, RecoversClusterScaleSpread) {
    Rng rng(9);
    const auto sim = simulate(HawkesParams{0.1, 0.55, ExponentialKernel{1.0}}, 1000.0, rng);
    const auto part = clusters_from_branching(sim.branching, sim.times, 1000.0);
    std::vector<double> z(part.cluster_count());
    for (double& v : z) v = rng.normal();
    std::vector<double> y(sim.times.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = gpd_sample({std::exp(z[part.assignment[i]]), 0.15}, rng);

    MarkChainConfig cfg;
    cfg.iterations = 2000;
    cfg.warmup = 1000;
    cfg.chains = 4;
    cfg.keep = 0;
    const auto states = sample_mark_posterior(y, part, GpdPriors{}, MarkModel::hierarchical, cfg, 31);
    std::vector<double> tau;
    for (const auto& s : states) {
        ASSERT_EQ(s.z.size(), part.cluster_count());
        tau.push_back(s.tau_sigma);
    }
    EXPECT_GT(empirical_quantile(tau, 0.025), 0.3);
}

TEST(MarkSampler, ReproducibleAndThinned) {
    const auto y = gpd_draws(60, 1.0, 0.1, 6);
    ClusterPartition part;
    part.boundaries = {0, 20, 40};
    for (std::size_t i = 0; i < 60; ++i) part.assignment.push_back(i / 20);
    MarkChainConfig cfg;
    cfg.iterations = 300;
    cfg.warmup = 100;
    cfg.chains = 2;
    cfg.keep = 25;
    const auto a = sample_mark_posterior(y, part, GpdPriors{}, MarkModel::hierarchical, cfg, 3);
    cfg.threads = 2;
    const auto b = sample_mark_posterior(y, part, GpdPriors{}, MarkModel::hierarchical, cfg, 3);
    ASSERT_EQ(a.size(), 25u);
    ASSERT_EQ(b.size(), 25u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].log_sigma0, b[i].log_sigma0);
        EXPECT_EQ(a[i].z, b[i].z);
        EXPECT_EQ(a[i].z.size(), 3u);
        EXPECT_GT(a[i].xi, -0.25);
        EXPECT_GE(a[i].tau_sigma, 0.0);
    }
}

TEST(MarkFit, LeavesBranchingsUntouched) {
    Rng rng(10);
    const auto sim = simulate(HawkesParams{0.2, 0.5, ExponentialKernel{1.0}}, 200.0, rng);
    MarkedEventSeries s;
    s.window_start = 100.0;
    s.window_end = 300.0;
    for (double t : sim.times) {
        s.times.push_back(t + 100.0);
        s.excesses.push_back(gpd_sample({2.0, 0.1}, rng));
    }
    s.scale_factor = 2.0;
    PriorConfig priors;
    ChainConfig cfg;
    cfg.iterations = 200;
    cfg.burn_in = 50;
    cfg.chains = 2;
    const auto chain = run_hawkes_chain(s, KernelModel::exponential, priors, cfg, 4);
    const auto before = chain.draws;
    const auto reps = evenly_spaced_indices(chain.draws.size(), 5);
    MarkChainConfig mc;
    mc.iterations = 200;
    mc.warmup = 100;
    mc.chains = 1;
    mc.keep = 10;
    const auto fit = fit_marks_hierarchical(s, chain.draws, reps, MarkModel::hierarchical, priors.gpd, mc, 8);
    ASSERT_EQ(fit.entries.size(), reps.size());
    EXPECT_EQ(fit.scale_factor, 2.0);
    for (std::size_t i = 0; i < chain.draws.size(); ++i) EXPECT_EQ(chain.draws[i].branching.parents, before[i].branching.parents);
    for (std::size_t e = 0; e < fit.entries.size(); ++e) {
        const auto& entry = fit.entries[e];
        const auto& draw = chain.draws[reps[e]];
        EXPECT_EQ(entry.draw_index, reps[e]);
        EXPECT_EQ(entry.partition.cluster_count(), draw.branching.background_count());
        for (const auto& st : entry.states) EXPECT_EQ(st.z.size(), entry.partition.cluster_count());
    }
}
