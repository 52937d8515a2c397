#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hpot/random.hpp"

namespace hpot {

/// Generalised Pareto parameters. `sigma` is in units of the excess magnitude.
struct GpdParams {
    double sigma{1.0};
    double xi{0.0};
};

/// Below this |xi| the exponential (xi = 0) form of the GPD is used.
inline constexpr double kXiZeroTolerance = 1e-12;

/// Log density of GPD(sigma, xi) at y. Returns -infinity outside the support
/// (y < 0, or 1 + xi*y/sigma <= 0). Throws std::invalid_argument when sigma <= 0.
[[nodiscard]] double gpd_logpdf(double y, const GpdParams& p);

/// G(z | sigma, xi). Zero for z <= 0; one at or beyond the finite endpoint when xi < 0.
[[nodiscard]] double gpd_cdf(double z, const GpdParams& p);

/// Inverse of gpd_cdf for prob in [0, 1).
[[nodiscard]] double gpd_quantile(double prob, const GpdParams& p);

/// Inverse-CDF draw.
[[nodiscard]] double gpd_sample(const GpdParams& p, Rng& rng);

/// Log density of an original-scale excess y when the model is fitted to y / scale_factor.
[[nodiscard]] double gpd_logpdf_rescaled(double y, const GpdParams& scaled, double scale_factor);

/// Observations before thresholding. Times must be strictly increasing.
struct RawSeries {
    std::vector<double> times;
    std::vector<double> values;
    double window_start{0.0};
    double window_end{0.0};

    /// Builds a series whose observation window spans the first to the last time.
    [[nodiscard]] static RawSeries from(std::vector<double> times, std::vector<double> values);

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    void validate() const;
};

enum class ThresholdKind { upper_percentile, lower_percentile, absolute };

struct ThresholdSpec {
    ThresholdKind kind{ThresholdKind::upper_percentile};
    double value{95.0};   // percentile in (0, 100) or absolute level
    bool negate{false};   // only meaningful for absolute levels

    [[nodiscard]] static ThresholdSpec upper(double percentile) { return {ThresholdKind::upper_percentile, percentile, false}; }
    [[nodiscard]] static ThresholdSpec lower(double percentile) { return {ThresholdKind::lower_percentile, percentile, true}; }
    [[nodiscard]] static ThresholdSpec absolute(double level, bool negate = false) { return {ThresholdKind::absolute, level, negate}; }
};

inline constexpr const char* kQuantileConvention = "linear-interpolation (type 7)";

/// A threshold pinned to a level. When `negated`, values are negated before comparison
/// so that lower-tail exceedances become positive excesses.
struct ResolvedThreshold {
    double level{0.0};
    bool negated{false};
};

[[nodiscard]] ResolvedThreshold resolve_threshold(std::span<const double> values, const ThresholdSpec& spec);

/// Threshold-exceedance series on [window_start, window_end]; excesses are on the
/// original scale and `scale_factor` records the training normalisation c.
struct MarkedEventSeries {
    double window_start{0.0};
    double window_end{0.0};
    double threshold{0.0};
    bool negated{false};
    std::vector<double> times;
    std::vector<double> excesses;
    double scale_factor{1.0};

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] bool empty() const noexcept { return times.empty(); }
    [[nodiscard]] std::vector<double> scaled_excesses() const;
    void validate() const;
};

/// Keeps observations strictly above the threshold (after negation for lower tails).
/// Throws DataError on non-increasing timestamps. An empty result is valid.
[[nodiscard]] MarkedEventSeries extract_exceedances(const RawSeries& series, const ThresholdSpec& spec);
[[nodiscard]] MarkedEventSeries extract_exceedances(const RawSeries& series, const ResolvedThreshold& threshold);

enum class ScaleKind { median_excess, mean_excess, explicit_value };

struct ScalePolicy {
    ScaleKind kind{ScaleKind::median_excess};
    double value{1.0};
};

/// Scale factor from training excesses. Median falls back to mean; throws DataError when
/// no positive finite scale can be produced.
[[nodiscard]] double compute_scale_factor(std::span<const double> training_excesses, const ScalePolicy& policy);
[[nodiscard]] MarkedEventSeries set_scale_factor(MarkedEventSeries series, const ScalePolicy& policy);

}  // namespace hpot
