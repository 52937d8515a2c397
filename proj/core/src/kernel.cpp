#include "hpot/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hpot/numeric.hpp"

namespace hpot {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Stick-breaking atoms below this weight contribute nothing measurable to h or H.
constexpr double kNegligibleWeight = 1e-14;

// Standard normal draw restricted to (a, b], by inverse CDF on whichever tail is stable.
double truncated_standard_normal(double a, double b, Rng& rng) {
    if (a > 0.0) {
        const double sa = normal_sf(a);
        const double sb = normal_sf(b);
        const double s = sb + rng.uniform() * (sa - sb);
        return -normal_quantile(s);
    }
    const double fa = normal_cdf(a);
    const double fb = normal_cdf(b);
    return normal_quantile(fa + rng.uniform() * (fb - fa));
}

}  // namespace

void LognormalMixture::validate() const {
    if (weights.empty() || weights.size() != locations.size() || weights.size() != scales.size()) {
        throw std::invalid_argument("lognormal mixture requires matching nonempty weight/location/scale arrays");
    }
    double total = 0.0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (!(weights[l] >= 0.0) || !(scales[l] > 0.0) || !std::isfinite(locations[l]) || !std::isfinite(scales[l])) {
            throw std::invalid_argument("lognormal mixture has an invalid component");
        }
        total += weights[l];
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("lognormal mixture weights must sum to one");
    }
}

double mixture_density(double x, const LognormalMixture& k) {
    if (!(x > 0.0)) {
        throw std::domain_error("mixture_density requires a positive lag");
    }
    const double lx = std::log(x);
    double acc = 0.0;
    for (std::size_t l = 0; l < k.size(); ++l) {
        const double r = (lx - k.locations[l]) / k.scales[l];
        acc += k.weights[l] * std::exp(-0.5 * r * r) / k.scales[l];
    }
    return acc * kInvSqrt2Pi / x;
}

double mixture_cdf(double x, const LognormalMixture& k) {
    if (!(x > 0.0)) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    const double lx = std::log(x);
    double acc = 0.0;
    for (std::size_t l = 0; l < k.size(); ++l) {
        acc += k.weights[l] * normal_cdf((lx - k.locations[l]) / k.scales[l]);
    }
    return acc;
}

void validate_kernel(const TriggeringKernel& kernel) {
    if (const auto* e = std::get_if<ExponentialKernel>(&kernel)) {
        if (!(e->rate > 0.0) || !std::isfinite(e->rate)) {
            throw std::invalid_argument("exponential kernel rate must be positive and finite");
        }
        return;
    }
    std::get<LognormalMixture>(kernel).validate();
}

double kernel_density(const TriggeringKernel& kernel, double lag) {
    if (!(lag > 0.0)) {
        return 0.0;
    }
    if (const auto* e = std::get_if<ExponentialKernel>(&kernel)) {
        return e->rate * std::exp(-e->rate * lag);
    }
    return mixture_density(lag, std::get<LognormalMixture>(kernel));
}

double kernel_cdf(const TriggeringKernel& kernel, double lag) {
    if (!(lag > 0.0)) {
        return 0.0;
    }
    if (const auto* e = std::get_if<ExponentialKernel>(&kernel)) {
        return -std::expm1(-e->rate * lag);
    }
    return mixture_cdf(lag, std::get<LognormalMixture>(kernel));
}

CompiledKernel::CompiledKernel(const TriggeringKernel& kernel) {
    if (const auto* e = std::get_if<ExponentialKernel>(&kernel)) {
        rate_ = e->rate;
        return;
    }
    exponential_ = false;
    const auto& m = std::get<LognormalMixture>(kernel);
    for (std::size_t l = 0; l < m.size(); ++l) {
        if (m.weights[l] < kNegligibleWeight) {
            continue;
        }
        weights_.push_back(m.weights[l]);
        locations_.push_back(m.locations[l]);
        inv_scales_.push_back(1.0 / m.scales[l]);
        coefficients_.push_back(m.weights[l] * kInvSqrt2Pi / m.scales[l]);
    }
}

double CompiledKernel::density(double lag) const {
    if (!(lag > 0.0)) {
        return 0.0;
    }
    if (exponential_) {
        return rate_ * std::exp(-rate_ * lag);
    }
    const double lx = std::log(lag);
    double acc = 0.0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const double r = (lx - locations_[l]) * inv_scales_[l];
        acc += coefficients_[l] * std::exp(-0.5 * r * r);
    }
    return acc / lag;
}

double CompiledKernel::cdf(double lag) const {
    if (!(lag > 0.0)) {
        return 0.0;
    }
    if (exponential_) {
        return -std::expm1(-rate_ * lag);
    }
    if (std::isinf(lag)) {
        return 1.0;
    }
    const double lx = std::log(lag);
    double acc = 0.0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        acc += weights_[l] * normal_cdf((lx - locations_[l]) * inv_scales_[l]);
    }
    return acc;
}

double CompiledKernel::mass(double lower, double upper) const {
    if (!(upper > lower)) {
        return 0.0;
    }
    if (exponential_) {
        // exp(-r a) - exp(-r b), kept accurate when both tails are tiny
        const double a = std::max(lower, 0.0);
        return std::exp(-rate_ * a) * -std::expm1(-rate_ * (upper - a));
    }
    const double la = lower > 0.0 ? std::log(lower) : -std::numeric_limits<double>::infinity();
    const double lb = std::isinf(upper) ? std::numeric_limits<double>::infinity() : std::log(upper);
    double acc = 0.0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const double za = (la - locations_[l]) * inv_scales_[l];
        const double zb = (lb - locations_[l]) * inv_scales_[l];
        acc += weights_[l] * (za > 0.0 ? normal_sf(za) - normal_sf(zb) : normal_cdf(zb) - normal_cdf(za));
    }
    return acc;
}

double CompiledKernel::sample(double lower, double upper, Rng& rng) const {
    lower = std::max(lower, 0.0);
    if (exponential_) {
        // survival-scale inversion on (lower, upper]
        const double s_hi = std::exp(-rate_ * lower);
        const double s_lo = std::isinf(upper) ? 0.0 : std::exp(-rate_ * upper);
        if (s_hi - s_lo <= 0.0) {
            return lower;
        }
        const double s = s_lo + rng.uniform() * (s_hi - s_lo);
        return -std::log(s) / rate_;
    }
    const double la = lower > 0.0 ? std::log(lower) : -std::numeric_limits<double>::infinity();
    const double lb = std::isinf(upper) ? std::numeric_limits<double>::infinity() : std::log(upper);
    std::vector<double> masses(weights_.size());
    double total = 0.0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const double za = (la - locations_[l]) * inv_scales_[l];
        const double zb = (lb - locations_[l]) * inv_scales_[l];
        masses[l] = weights_[l] * (za > 0.0 ? normal_sf(za) - normal_sf(zb) : normal_cdf(zb) - normal_cdf(za));
        total += masses[l];
    }
    if (!(total > 0.0)) {
        return lower;
    }
    const std::size_t l = rng.categorical(masses, total);
    const double za = (la - locations_[l]) * inv_scales_[l];
    const double zb = (lb - locations_[l]) * inv_scales_[l];
    const double z = truncated_standard_normal(za, zb, rng);
    return std::exp(locations_[l] + z / inv_scales_[l]);
}

}  // namespace hpot
