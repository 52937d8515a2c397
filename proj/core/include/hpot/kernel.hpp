#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "hpot/random.hpp"

namespace hpot {

/// h(x) = rate * exp(-rate * x).
struct ExponentialKernel {
    double rate{1.0};
};

/// Lognormal mixture on the lag scale: component l has log-lag mean `locations[l]` and
/// log-lag standard deviation `scales[l]`. Weights are nonnegative and sum to one.
/// `truncation` is the stick-breaking truncation the mixture was drawn with (0 if not
/// drawn from a DP). Identical atoms may be merged, so size() can be below truncation.
struct LognormalMixture {
    std::vector<double> weights;
    std::vector<double> locations;
    std::vector<double> scales;
    std::size_t truncation{0};

    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
    void validate() const;
};

using TriggeringKernel = std::variant<ExponentialKernel, LognormalMixture>;

/// h(x) = sum_l w_l * phi((log x - m_l) / s_l) / (s_l * x). Throws std::domain_error for x <= 0.
[[nodiscard]] double mixture_density(double x, const LognormalMixture& k);

/// H(x) = sum_l w_l * Phi((log x - m_l) / s_l); zero for x <= 0.
[[nodiscard]] double mixture_cdf(double x, const LognormalMixture& k);

void validate_kernel(const TriggeringKernel& kernel);

/// Density of the triggering lag; zero for lag <= 0.
[[nodiscard]] double kernel_density(const TriggeringKernel& kernel, double lag);
/// CDF of the triggering lag; zero for lag <= 0.
[[nodiscard]] double kernel_cdf(const TriggeringKernel& kernel, double lag);

/// Precomputed form of a kernel for the O(n^2) inner loops.
class CompiledKernel {
public:
    explicit CompiledKernel(const TriggeringKernel& kernel);

    [[nodiscard]] double density(double lag) const;
    [[nodiscard]] double cdf(double lag) const;
    /// P(lower < lag <= upper) for 0 <= lower < upper.
    [[nodiscard]] double mass(double lower, double upper) const;
    /// A lag drawn from the kernel conditioned on (lower, upper]; upper may be +infinity.
    [[nodiscard]] double sample(double lower, double upper, Rng& rng) const;

private:
    bool exponential_{true};
    double rate_{1.0};
    std::vector<double> weights_;
    std::vector<double> locations_;
    std::vector<double> inv_scales_;
    std::vector<double> coefficients_;  // w_l / (s_l * sqrt(2 pi))
};

}  // namespace hpot
