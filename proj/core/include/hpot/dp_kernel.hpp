#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hpot/kernel.hpp"
#include "hpot/random.hpp"

namespace hpot {

/// DP mixture settings. The mixture lives on z = log(lag) with Normal components and a
/// Normal-Inverse-Gamma base measure: mean | var ~ N(mu0, var / k0), var ~ InvGamma(a0, b0).
struct DpConfig {
    double alpha_shape{2.0};  // Gamma prior on the concentration, shape/rate
    double alpha_rate{4.0};
    double mu0{0.0};
    double k0{1.0};
    double a0{1.0};
    double b0{1.0};
    std::size_t truncation{1000};

    void validate() const;
};

/// Normal-Inverse-Gamma parameters (prior or posterior).
struct NigParams {
    double mu;
    double k;
    double a;
    double b;
};

[[nodiscard]] NigParams nig_prior(const DpConfig& cfg);
[[nodiscard]] NigParams nig_posterior(const DpConfig& cfg, std::size_t count, double sum, double sum_sq);

/// Student-t predictive: 2a degrees of freedom, location mu, squared scale b(k+1)/(a k).
[[nodiscard]] double nig_log_predictive(const NigParams& nig, double z);

struct CrpComponent {
    double mean{0.0};
    double variance{1.0};
    std::size_t count{0};
};

inline constexpr std::int32_t kUnseated = -1;

/// Component labels for each log-lag, plus per-component (mean, variance).
/// Labels equal to kUnseated mark lags that have not been seated yet.
struct CrpState {
    std::vector<std::int32_t> labels;
    std::vector<CrpComponent> components;

    [[nodiscard]] std::size_t lag_count() const noexcept { return labels.size(); }
    void validate() const;
};

/// One collapsed-Gibbs sweep over all lags using the NIG posterior predictive for existing
/// and new components, followed by a conjugate redraw of every occupied component's
/// parameters. `state.labels` must have one entry per lag; stale or empty components are
/// dropped. The returned state has only occupied components.
[[nodiscard]] CrpState crp_sweep(std::span<const double> lags, CrpState state, const DpConfig& cfg, double alpha_dp,
                                 Rng& rng);

/// Auxiliary-variable update of the DP concentration under its Gamma prior.
[[nodiscard]] double sample_concentration(double alpha_dp, std::size_t n_lags, std::size_t n_components,
                                          const DpConfig& cfg, Rng& rng);

/// Stick-breaking weights from fractions v; the residual stick is folded into the last weight.
[[nodiscard]] std::vector<double> stick_breaking_weights(std::span<const double> fractions);

/// Truncated stick-breaking draw from the conjugate DP posterior given the component
/// parameters of the current lags: alpha' = alpha + n, atoms from
/// [alpha/(alpha+n)] G0 + [n/(alpha+n)] empirical(phi_i). Atoms that coincide with the same
/// occupied component are merged.
[[nodiscard]] LognormalMixture posterior_dp_draw(const CrpState& state, double alpha_dp, const DpConfig& cfg,
                                                 Rng& rng);

/// posterior_dp_draw with no lags.
[[nodiscard]] LognormalMixture prior_dp_draw(double alpha_dp, const DpConfig& cfg, Rng& rng);

}  // namespace hpot
