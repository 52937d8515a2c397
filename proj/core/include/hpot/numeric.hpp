#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace hpot {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

// Log-density terms below this are treated as a rejection rather than propagated.
inline constexpr double kLogDensityFloor = -1e300;

[[nodiscard]] double log_sum_exp(std::span<const double> values);
[[nodiscard]] double log_mean_exp(std::span<const double> values);

// Delta-method standard error of log_mean_exp(values) treating the entries as iid.
[[nodiscard]] double log_mean_exp_standard_error(std::span<const double> values);

// Linear-interpolation empirical quantile (Hyndman-Fan type 7). Sorts a copy.
[[nodiscard]] double empirical_quantile(std::span<const double> values, double prob);
[[nodiscard]] double quantile_sorted(std::span<const double> sorted, double prob);

[[nodiscard]] double mean(std::span<const double> values);
[[nodiscard]] double sample_variance(std::span<const double> values);

// Standard error of the mean using non-overlapping batch means, for autocorrelated chains.
[[nodiscard]] double batch_means_standard_error(std::span<const double> values, std::size_t batches = 20);

[[nodiscard]] inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
[[nodiscard]] inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }
[[nodiscard]] inline double normal_logpdf(double x, double mean, double sd) {
    const double r = (x - mean) / sd;
    return -0.5 * r * r - std::log(sd) - kLogSqrt2Pi;
}
[[nodiscard]] double normal_quantile(double prob);

// Regularised lower incomplete gamma P(a, x) and its inverse in x.
[[nodiscard]] double gamma_p(double shape, double x);
[[nodiscard]] double gamma_p_inverse(double shape, double prob);

}  // namespace hpot
