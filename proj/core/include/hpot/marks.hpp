#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hpot/evt.hpp"
#include "hpot/hawkes.hpp"
#include "hpot/mcmc.hpp"

namespace hpot {

/// Cluster-scale GPD state: log sigma_k = log_sigma0 + tau_sigma * z_k, shared xi.
struct GpdHierState {
    double log_sigma0{0.0};
    double tau_sigma{0.0};
    double xi{0.1};
    std::vector<double> z;

    [[nodiscard]] double cluster_log_sigma(std::size_t k) const { return log_sigma0 + tau_sigma * z[k]; }
    [[nodiscard]] double cluster_sigma(std::size_t k) const { return std::exp(cluster_log_sigma(k)); }
};

struct MarkChainConfig {
    std::size_t iterations{2000};
    std::size_t warmup{1000};
    std::size_t chains{4};
    std::size_t keep{100};  // retained states per fit, evenly spaced across chains; 0 keeps all
    std::size_t threads{1};

    void validate() const;
};

/// Log prior of the mark parameters plus the GPD log-likelihood of the scaled excesses.
/// The iid model ignores z and requires tau_sigma = 0. Returns -inf outside the support.
[[nodiscard]] double mark_log_posterior(const GpdHierState& s, std::span<const double> scaled,
                                        const ClusterPartition& partition, const GpdPriors& priors, MarkModel model);

/// Metropolis-within-Gibbs over (z_1..z_K, log sigma0, log tau_sigma, xi) with two
/// likelihood-free reparameterisation moves that slide between the centred and
/// non-centred forms. Proposal scales adapt during warm-up only. Returns retained states
/// across all chains, chain-major before thinning to `cfg.keep`.
[[nodiscard]] std::vector<GpdHierState> sample_mark_posterior(std::span<const double> scaled,
                                                              const ClusterPartition& partition,
                                                              const GpdPriors& priors, MarkModel model,
                                                              const MarkChainConfig& cfg, std::uint64_t seed);

/// Mark posterior conditioned on one representative branching.
struct MarkFitEntry {
    std::size_t draw_index{0};  // position in the Hawkes draw sequence
    std::size_t draw_chain{0};
    std::size_t draw_iteration{0};
    ClusterPartition partition;
    std::vector<GpdHierState> states;
};

struct MarkFit {
    MarkModel model{MarkModel::hierarchical};
    double scale_factor{1.0};
    std::vector<MarkFitEntry> entries;
};

/// Fits the mark model on each representative Hawkes draw. `draws` must come from a chain
/// run on `series`; branchings are read, never modified.
[[nodiscard]] MarkFit fit_marks_hierarchical(const MarkedEventSeries& series, std::span<const PosteriorDraw> draws,
                                             std::span<const std::size_t> representative, MarkModel model,
                                             const GpdPriors& priors, const MarkChainConfig& cfg,
                                             std::uint64_t seed);

}  // namespace hpot
