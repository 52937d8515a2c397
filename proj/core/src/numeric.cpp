#include "hpot/numeric.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace hpot {

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) {
        return -std::numeric_limits<double>::infinity();
    }
    const double max = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(max)) {
        return max;
    }
    double acc = 0.0;
    for (double v : values) {
        acc += std::exp(v - max);
    }
    return max + std::log(acc);
}

double log_mean_exp(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("log_mean_exp of an empty set");
    }
    return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

double log_mean_exp_standard_error(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) {
        return 0.0;
    }
    const double max = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(max)) {
        return 0.0;
    }
    std::vector<double> w(n);
    std::transform(values.begin(), values.end(), w.begin(), [max](double v) { return std::exp(v - max); });
    const double m = mean(w);
    const double var = sample_variance(w);
    return std::sqrt(var / static_cast<double>(n)) / m;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile of an empty set");
    }
    if (!(prob >= 0.0 && prob <= 1.0)) {
        throw std::invalid_argument("quantile probability must lie in [0, 1]");
    }
    const double h = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double empirical_quantile(std::span<const double> values, double prob) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, prob);
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) {
        return 0.0;
    }
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - m) * (v - m);
    }
    return ss / static_cast<double>(n - 1);
}

double batch_means_standard_error(std::span<const double> values, std::size_t batches) {
    const std::size_t n = values.size();
    if (n < 2 * batches) {
        return std::sqrt(sample_variance(values) / static_cast<double>(std::max<std::size_t>(n, 1)));
    }
    const std::size_t size = n / batches;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        means[b] = mean(values.subspan(b * size, size));
    }
    return std::sqrt(sample_variance(means) / static_cast<double>(batches));
}

double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) {
        if (prob == 0.0) return -std::numeric_limits<double>::infinity();
        if (prob == 1.0) return std::numeric_limits<double>::infinity();
        throw std::invalid_argument("normal_quantile probability outside [0, 1]");
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * prob);
}

double gamma_p(double shape, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    return boost::math::gamma_p(shape, x);
}

double gamma_p_inverse(double shape, double prob) {
    if (prob <= 0.0) {
        return 0.0;
    }
    return boost::math::gamma_p_inv(shape, prob);
}

}  // namespace hpot
