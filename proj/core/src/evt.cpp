#include "hpot/evt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hpot/errors.hpp"
#include "hpot/numeric.hpp"

namespace hpot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_scale(const GpdParams& p) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
        throw std::invalid_argument("GPD scale must be positive and finite");
    }
    if (!std::isfinite(p.xi)) {
        throw std::invalid_argument("GPD shape must be finite");
    }
}

}  // namespace

double gpd_logpdf(double y, const GpdParams& p) {
    check_scale(p);
    if (!(y >= 0.0)) {
        return kNegInf;
    }
    const double r = y / p.sigma;
    if (std::abs(p.xi) < kXiZeroTolerance) {
        return -std::log(p.sigma) - r;
    }
    const double arg = p.xi * r;
    if (arg <= -1.0) {
        return kNegInf;
    }
    return -std::log(p.sigma) - (1.0 / p.xi + 1.0) * std::log1p(arg);
}

double gpd_cdf(double z, const GpdParams& p) {
    check_scale(p);
    if (!(z > 0.0)) {
        return 0.0;
    }
    const double r = z / p.sigma;
    if (std::abs(p.xi) < kXiZeroTolerance) {
        return -std::expm1(-r);
    }
    const double arg = p.xi * r;
    if (arg <= -1.0) {
        return 1.0;
    }
    return -std::expm1(-std::log1p(arg) / p.xi);
}

double gpd_quantile(double prob, const GpdParams& p) {
    check_scale(p);
    if (!(prob >= 0.0 && prob < 1.0)) {
        throw std::invalid_argument("gpd_quantile probability must lie in [0, 1)");
    }
    const double log_survival = std::log1p(-prob);
    if (std::abs(p.xi) < kXiZeroTolerance) {
        return -p.sigma * log_survival;
    }
    return p.sigma / p.xi * std::expm1(-p.xi * log_survival);
}

double gpd_sample(const GpdParams& p, Rng& rng) {
    return gpd_quantile(rng.uniform(), p);
}

double gpd_logpdf_rescaled(double y, const GpdParams& scaled, double scale_factor) {
    return gpd_logpdf(y / scale_factor, scaled) - std::log(scale_factor);
}

RawSeries RawSeries::from(std::vector<double> times, std::vector<double> values) {
    RawSeries s;
    s.times = std::move(times);
    s.values = std::move(values);
    if (!s.times.empty()) {
        s.window_start = s.times.front();
        s.window_end = s.times.back();
    }
    return s;
}

void RawSeries::validate() const {
    if (times.size() != values.size()) {
        throw DataError("raw series times and values differ in length");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw DataError("raw series timestamps must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
}

ResolvedThreshold resolve_threshold(std::span<const double> values, const ThresholdSpec& spec) {
    switch (spec.kind) {
    case ThresholdKind::absolute:
        return {spec.value, spec.negate};
    case ThresholdKind::upper_percentile:
    case ThresholdKind::lower_percentile: {
        if (!(spec.value > 0.0 && spec.value < 100.0)) {
            throw std::invalid_argument("threshold percentile must lie in (0, 100)");
        }
        if (values.empty()) {
            throw DataError("cannot compute a percentile threshold from an empty series");
        }
        const bool lower = spec.kind == ThresholdKind::lower_percentile;
        std::vector<double> v(values.begin(), values.end());
        if (lower) {
            for (double& x : v) x = -x;
        }
        const double prob = lower ? 1.0 - spec.value / 100.0 : spec.value / 100.0;
        return {empirical_quantile(v, prob), lower};
    }
    }
    throw std::logic_error("unknown threshold kind");
}

std::vector<double> MarkedEventSeries::scaled_excesses() const {
    std::vector<double> out(excesses.size());
    std::transform(excesses.begin(), excesses.end(), out.begin(), [c = scale_factor](double y) { return y / c; });
    return out;
}

void MarkedEventSeries::validate() const {
    if (times.size() != excesses.size()) {
        throw DataError("event times and excesses differ in length");
    }
    if (!(scale_factor > 0.0) || !std::isfinite(scale_factor)) {
        throw DataError("scale factor must be positive and finite");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw DataError("event times must be strictly increasing");
        }
        if (!(excesses[i] > 0.0)) {
            throw DataError("excesses must be positive");
        }
        if (times[i] < window_start || times[i] > window_end) {
            throw DataError("event time outside the observation window");
        }
    }
}

MarkedEventSeries extract_exceedances(const RawSeries& series, const ResolvedThreshold& threshold) {
    series.validate();
    MarkedEventSeries out;
    out.window_start = series.window_start;
    out.window_end = series.window_end;
    out.threshold = threshold.level;
    out.negated = threshold.negated;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double r = threshold.negated ? -series.values[i] : series.values[i];
        if (r > threshold.level) {
            out.times.push_back(series.times[i]);
            out.excesses.push_back(r - threshold.level);
        }
    }
    return out;
}

MarkedEventSeries extract_exceedances(const RawSeries& series, const ThresholdSpec& spec) {
    return extract_exceedances(series, resolve_threshold(series.values, spec));
}

double compute_scale_factor(std::span<const double> training_excesses, const ScalePolicy& policy) {
    const auto usable = [](double c) { return c > 0.0 && std::isfinite(c); };
    if (policy.kind == ScaleKind::explicit_value) {
        if (!usable(policy.value)) {
            throw DataError("explicit scale factor must be positive and finite");
        }
        return policy.value;
    }
    std::vector<double> positive;
    for (double y : training_excesses) {
        if (y > 0.0 && std::isfinite(y)) positive.push_back(y);
    }
    if (positive.empty()) {
        throw DataError("no positive training excesses to derive a scale factor from");
    }
    if (policy.kind == ScaleKind::median_excess) {
        const double c = empirical_quantile(positive, 0.5);
        if (usable(c)) return c;
    }
    const double c = mean(positive);
    if (usable(c)) return c;
    throw DataError("could not derive a positive finite scale factor");
}

MarkedEventSeries set_scale_factor(MarkedEventSeries series, const ScalePolicy& policy) {
    series.scale_factor = compute_scale_factor(series.excesses, policy);
    return series;
}

}  // namespace hpot
