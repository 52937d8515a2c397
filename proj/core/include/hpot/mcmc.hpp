#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpot/dp_kernel.hpp"
#include "hpot/evt.hpp"
#include "hpot/hawkes.hpp"
#include "hpot/random.hpp"

namespace hpot {

/// Priors of the hierarchical GPD mark model.
struct GpdPriors {
    double log_sigma0_mean{0.0};
    double log_sigma0_sd{1.0};
    double tau_sd{0.5};     // half-normal scale of tau_sigma
    double xi_sd{0.2};      // N(0, xi_sd^2) truncated below at xi_lower
    double xi_lower{-0.25};
};

/// Prior and hyperparameter settings. Gammas use shape/rate. The kappa prior is a Gamma
/// truncated to (0, 1); shape 1 and rate 0 give Uniform(0, 1).
struct PriorConfig {
    double mu_shape{0.1};
    double mu_rate{0.1};
    double kappa_shape{1.0};
    double kappa_rate{0.0};
    double beta_upper{100.0};  // Exponential kernel rate ~ Uniform(0, beta_upper)
    DpConfig dp;
    GpdPriors gpd;

    void validate() const;
};

enum class KernelModel { exponential, dirichlet_process };
enum class MarkModel { iid, hierarchical };

[[nodiscard]] std::string to_string(KernelModel m);
[[nodiscard]] std::string to_string(MarkModel m);

struct PosteriorDraw {
    std::size_t chain{0};
    std::size_t iteration{0};
    HawkesParams hawkes;
    BranchingStructure branching;
    double alpha_dp{0.0};  // DP models only
    double loglik{0.0};    // branching-conditional log-likelihood
};

struct ChainConfig {
    std::size_t iterations{10000};
    std::size_t burn_in{2000};
    std::size_t chains{4};
    std::size_t thin{1};
    std::size_t threads{1};

    void validate() const;
};

/// Pr(B_i = 0), Pr(B_i = 1), ..., Pr(B_i = i) for event i (zero-based index, so entry j+1
/// is the probability that event j is the parent).
[[nodiscard]] std::vector<double> allocation_probabilities(std::span<const double> events, std::size_t i,
                                                           const HawkesParams& p);

[[nodiscard]] BranchingStructure sample_branching(std::span<const double> events, const HawkesParams& p, Rng& rng);

/// Redraws parents for events [first, n) only; parents of earlier events are left unchanged.
void sample_branching_from(std::span<const double> events, std::size_t first, const HawkesParams& p, Rng& rng,
                           BranchingStructure& b);

/// mu | B ~ Gamma(mu_shape + |S_0|, mu_rate + T).
[[nodiscard]] double sample_mu(const BranchingStructure& b, double T, const PriorConfig& priors, Rng& rng);

/// Gamma(shape, rate) restricted to (0, 1). Inverse CDF on the restricted range; a
/// Beta(shape, 1) proposal with exp(-rate * x) acceptance when rate < 1.
/// Throws NumericalError when the truncation mass underflows.
[[nodiscard]] double sample_truncated_gamma_unit(double shape, double rate, Rng& rng);

/// kappa | B, h ~ Gamma(kappa_shape + sum|S_j|, kappa_rate + sum H(T - t_j)) on (0, 1).
[[nodiscard]] double sample_kappa(const BranchingStructure& b, std::span<const double> events,
                                  const TriggeringKernel& kernel, double T, const PriorConfig& priors, Rng& rng);

/// Conditional target of the Exponential kernel rate beta on the log scale:
/// n log b - b sum(x) - kappa sum_j (1 - exp(-b (T - t_j))) + log b, on 0 < b < upper.
struct ExponentialRateTarget {
    double lag_sum{0.0};
    std::size_t lag_count{0};
    std::vector<double> horizons;  // T - t_j
    double kappa{0.0};
    double upper{100.0};

    [[nodiscard]] static ExponentialRateTarget from(const BranchingStructure& b, std::span<const double> events,
                                                    double kappa, double T, const PriorConfig& priors);
    [[nodiscard]] double log_density(double rate) const;
};

/// Random-walk Metropolis on log(beta) with Robbins-Monro scale adaptation toward a 0.44
/// acceptance rate while `adapt` is set.
class ExponentialRateSampler {
public:
    explicit ExponentialRateSampler(double proposal_sd = 0.5) : log_sd_(std::log(proposal_sd)) {}

    double step(const ExponentialRateTarget& target, double current, Rng& rng, bool adapt);
    [[nodiscard]] static double log_acceptance(const ExponentialRateTarget& target, double current, double proposed);

    [[nodiscard]] double proposal_sd() const { return std::exp(log_sd_); }
    [[nodiscard]] double acceptance_rate() const {
        return proposals_ == 0 ? 0.0 : static_cast<double>(accepted_) / static_cast<double>(proposals_);
    }

private:
    double log_sd_;
    std::size_t adapt_steps_{0};
    std::size_t proposals_{0};
    std::size_t accepted_{0};
};

/// log of exp(-kappa * sum_j [H*(T - t_j) - H(T - t_j)]), the integrated-hazard MH correction.
[[nodiscard]] double hazard_log_acceptance(std::span<const double> events, double kappa, double T,
                                           const TriggeringKernel& proposed, const TriggeringKernel& current);

/// Observed triggering lags t_i - t_{B_i} for B_i != background, in event order.
[[nodiscard]] std::vector<double> triggering_lags(const BranchingStructure& b, std::span<const double> events);

struct DpKernelStep {
    LognormalMixture kernel;
    CrpState crp;
    bool accepted{false};
    double log_acceptance{0.0};
};

/// CRP sweep on the current log-lags, a proposal from the conjugate DP posterior and an
/// accept/reject with the integrated-hazard correction. `crp.labels` must align with
/// triggering_lags(b, events). The CRP update is kept even when the kernel is rejected.
[[nodiscard]] DpKernelStep sample_kernel_dp(const BranchingStructure& b, std::span<const double> events, double kappa,
                                            double T, CrpState crp, const DpConfig& cfg, double alpha_dp,
                                            const LognormalMixture& current, Rng& rng);

struct HawkesChainResult {
    KernelModel model{KernelModel::exponential};
    std::vector<PosteriorDraw> draws;  // retained draws, chain-major
    double kernel_acceptance{0.0};     // post burn-in acceptance of the beta or DP kernel step
};

/// Systematic-scan Gibbs: B, mu, kappa, kernel (beta MH or DP step), alpha_DP (DP only).
/// Event times are relative to a window starting at 0 and ending at T.
[[nodiscard]] HawkesChainResult run_hawkes_chain(std::span<const double> times, double T, KernelModel model,
                                                 const PriorConfig& priors, const ChainConfig& cfg,
                                                 std::uint64_t seed);

/// Reads only the event times of `series`; excess magnitudes never reach the Hawkes chain.
[[nodiscard]] HawkesChainResult run_hawkes_chain(const MarkedEventSeries& series, KernelModel model,
                                                 const PriorConfig& priors, const ChainConfig& cfg,
                                                 std::uint64_t seed);

/// `count` evenly spaced indices into a sequence of length n (all of them if count >= n).
[[nodiscard]] std::vector<std::size_t> evenly_spaced_indices(std::size_t n, std::size_t count);

}  // namespace hpot
