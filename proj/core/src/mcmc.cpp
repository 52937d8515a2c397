#include "hpot/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hpot/errors.hpp"
#include "hpot/numeric.hpp"
#include "hpot/parallel.hpp"

namespace hpot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ChainRun {
    std::vector<PosteriorDraw> draws;
    std::size_t kernel_proposals{0};
    std::size_t kernel_accepts{0};
};

ChainRun run_single_chain(std::span<const double> times, double T, KernelModel model, const PriorConfig& priors,
                          const ChainConfig& cfg, std::size_t chain, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, {chain});
    const std::size_t n = times.size();

    HawkesParams p;
    p.mu = static_cast<double>(n) / (2.0 * T);
    p.kappa = 0.5;
    double alpha_dp = priors.dp.alpha_shape / priors.dp.alpha_rate;
    double rate = 1.0;
    if (model == KernelModel::exponential) {
        p.kernel = ExponentialKernel{rate};
    } else {
        p.kernel = prior_dp_draw(alpha_dp, priors.dp, rng);
    }
    BranchingStructure b = sample_branching(times, p, rng);

    ExponentialRateSampler rate_sampler;
    std::vector<std::int32_t> event_labels(n, kUnseated);
    std::vector<CrpComponent> components;

    ChainRun run;
    const std::size_t retained = cfg.iterations > cfg.burn_in ? (cfg.iterations - cfg.burn_in + cfg.thin - 1) / cfg.thin : 0;
    run.draws.reserve(retained);

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const bool sampling = it >= cfg.burn_in;
        try {
            b = sample_branching(times, p, rng);
            p.mu = sample_mu(b, T, priors, rng);
            p.kappa = sample_kappa(b, times, p.kernel, T, priors, rng);

            if (model == KernelModel::exponential) {
                const auto target = ExponentialRateTarget::from(b, times, p.kappa, T, priors);
                const double next = rate_sampler.step(target, rate, rng, !sampling);
                if (sampling) {
                    ++run.kernel_proposals;
                    if (next != rate) ++run.kernel_accepts;
                }
                rate = next;
                p.kernel = ExponentialKernel{rate};
            } else {
                CrpState crp;
                for (std::size_t i = 0; i < n; ++i) {
                    if (b.parents[i] != kBackground) crp.labels.push_back(event_labels[i]);
                }
                crp.components = std::move(components);
                DpKernelStep step = sample_kernel_dp(b, times, p.kappa, T, std::move(crp), priors.dp, alpha_dp,
                                                     std::get<LognormalMixture>(p.kernel), rng);
                std::size_t k = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    event_labels[i] = b.parents[i] != kBackground ? step.crp.labels[k++] : kUnseated;
                }
                components = std::move(step.crp.components);
                if (sampling) {
                    ++run.kernel_proposals;
                    if (step.accepted) ++run.kernel_accepts;
                }
                if (step.accepted) {
                    p.kernel = std::move(step.kernel);
                }
                alpha_dp = sample_concentration(alpha_dp, k, components.size(), priors.dp, rng);
            }
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (chain " + std::to_string(chain) + ", iteration " +
                                 std::to_string(it) + ")");
        }

        if (sampling && (it - cfg.burn_in) % cfg.thin == 0) {
            PosteriorDraw d;
            d.chain = chain;
            d.iteration = it;
            d.hawkes = p;
            d.branching = b;
            d.alpha_dp = model == KernelModel::dirichlet_process ? alpha_dp : 0.0;
            d.loglik = loglik_conditional(b, times, T, p);
            run.draws.push_back(std::move(d));
        }
    }
    return run;
}

}  // namespace

void PriorConfig::validate() const {
    if (!(mu_shape > 0.0 && mu_rate >= 0.0 && kappa_shape > 0.0 && kappa_rate >= 0.0 && beta_upper > 0.0)) {
        throw std::invalid_argument("Hawkes prior hyperparameters out of range");
    }
    if (!(gpd.log_sigma0_sd > 0.0 && gpd.tau_sd > 0.0 && gpd.xi_sd > 0.0)) {
        throw std::invalid_argument("GPD prior scales must be positive");
    }
    dp.validate();
}

std::string to_string(KernelModel m) {
    return m == KernelModel::exponential ? "Exp" : "DP";
}

std::string to_string(MarkModel m) {
    return m == MarkModel::iid ? "iid" : "hier";
}

void ChainConfig::validate() const {
    if (iterations == 0 || burn_in >= iterations || chains == 0 || thin == 0) {
        throw std::invalid_argument("chain configuration needs iterations > burn_in and positive chains/thin");
    }
}

std::vector<double> allocation_probabilities(std::span<const double> events, std::size_t i, const HawkesParams& p) {
    const CompiledKernel h(p.kernel);
    std::vector<double> w(i + 1);
    w[0] = p.mu;
    double total = p.mu;
    for (std::size_t j = 0; j < i; ++j) {
        w[j + 1] = p.kappa * h.density(events[i] - events[j]);
        total += w[j + 1];
    }
    for (double& v : w) v /= total;
    return w;
}

void sample_branching_from(std::span<const double> events, std::size_t first, const HawkesParams& p, Rng& rng,
                           BranchingStructure& b) {
    const std::size_t n = events.size();
    b.parents.resize(n, kBackground);
    const CompiledKernel h(p.kernel);
    std::vector<double> w;
    w.reserve(n);
    for (std::size_t i = first; i < n; ++i) {
        if (i == 0) {
            b.parents[0] = kBackground;
            continue;
        }
        w.resize(i + 1);
        w[0] = p.mu;
        double total = p.mu;
        for (std::size_t j = 0; j < i; ++j) {
            const double v = p.kappa * h.density(events[i] - events[j]);
            w[j + 1] = v;
            total += v;
        }
        if (!(total > 0.0)) {
            b.parents[i] = kBackground;
            continue;
        }
        const std::size_t pick = rng.categorical(w, total);
        b.parents[i] = pick == 0 ? kBackground : static_cast<std::int32_t>(pick - 1);
    }
}

BranchingStructure sample_branching(std::span<const double> events, const HawkesParams& p, Rng& rng) {
    BranchingStructure b;
    sample_branching_from(events, 0, p, rng, b);
    return b;
}

double sample_mu(const BranchingStructure& b, double T, const PriorConfig& priors, Rng& rng) {
    const double shape = priors.mu_shape + static_cast<double>(b.background_count());
    const double rate = priors.mu_rate + T;
    if (!(rate > 0.0)) {
        throw NumericalError("background-rate posterior has zero rate");
    }
    return rng.gamma(shape, rate);
}

double sample_truncated_gamma_unit(double shape, double rate, Rng& rng) {
    if (!(shape > 0.0) || !(rate >= 0.0)) {
        throw std::invalid_argument("truncated gamma needs positive shape and nonnegative rate");
    }
    if (rate < 1.0) {
        // Beta(shape, 1) proposal; acceptance exp(-rate * x) >= exp(-1).
        for (int attempt = 0; attempt < 100000; ++attempt) {
            const double x = std::exp(std::log(rng.uniform()) / shape);
            if (rate == 0.0 || rng.uniform() < std::exp(-rate * x)) {
                return x;
            }
        }
        throw NumericalError("truncated gamma rejection sampler did not terminate");
    }
    const double mass = gamma_p(shape, rate);
    if (!(mass > 1e-300)) {
        throw NumericalError("truncated gamma has negligible mass on (0, 1)");
    }
    const double x = gamma_p_inverse(shape, rng.uniform() * mass) / rate;
    return std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double sample_kappa(const BranchingStructure& b, std::span<const double> events, const TriggeringKernel& kernel,
                    double T, const PriorConfig& priors, Rng& rng) {
    const CompiledKernel h(kernel);
    double hazard = 0.0;
    for (double tj : events) {
        hazard += h.cdf(T - tj);
    }
    const double triggered = static_cast<double>(b.size() - b.background_count());
    return sample_truncated_gamma_unit(priors.kappa_shape + triggered, priors.kappa_rate + hazard, rng);
}

ExponentialRateTarget ExponentialRateTarget::from(const BranchingStructure& b, std::span<const double> events,
                                                  double kappa, double T, const PriorConfig& priors) {
    ExponentialRateTarget t;
    t.kappa = kappa;
    t.upper = priors.beta_upper;
    t.horizons.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        t.horizons.push_back(T - events[i]);
        const auto parent = b.parents[i];
        if (parent != kBackground) {
            t.lag_sum += events[i] - events[static_cast<std::size_t>(parent)];
            ++t.lag_count;
        }
    }
    return t;
}

double ExponentialRateTarget::log_density(double rate) const {
    if (!(rate > 0.0 && rate < upper)) {
        return kNegInf;
    }
    double hazard = 0.0;
    for (double z : horizons) {
        hazard += -std::expm1(-rate * z);
    }
    return (static_cast<double>(lag_count) + 1.0) * std::log(rate) - rate * lag_sum - kappa * hazard;
}

double ExponentialRateSampler::log_acceptance(const ExponentialRateTarget& target, double current, double proposed) {
    const double lp = target.log_density(proposed);
    if (!(lp > kLogDensityFloor)) {
        return kNegInf;
    }
    return std::min(0.0, lp - target.log_density(current));
}

double ExponentialRateSampler::step(const ExponentialRateTarget& target, double current, Rng& rng, bool adapt) {
    const double proposed = std::exp(std::log(current) + std::exp(log_sd_) * rng.normal());
    const double log_a = log_acceptance(target, current, proposed);
    const bool accept = std::log(rng.uniform()) < log_a;
    ++proposals_;
    if (accept) ++accepted_;
    if (adapt) {
        ++adapt_steps_;
        const double gain = std::min(0.5, 1.0 / std::sqrt(static_cast<double>(adapt_steps_)));
        log_sd_ += gain * (std::exp(log_a) - 0.44);
        log_sd_ = std::clamp(log_sd_, std::log(1e-4), std::log(10.0));
    }
    return accept ? proposed : current;
}

double hazard_log_acceptance(std::span<const double> events, double kappa, double T, const TriggeringKernel& proposed,
                             const TriggeringKernel& current) {
    if (kappa == 0.0) {
        return 0.0;
    }
    const CompiledKernel hp(proposed);
    const CompiledKernel hc(current);
    double delta = 0.0;
    for (double tj : events) {
        delta += hp.cdf(T - tj) - hc.cdf(T - tj);
    }
    return std::min(0.0, -kappa * delta);
}

std::vector<double> triggering_lags(const BranchingStructure& b, std::span<const double> events) {
    std::vector<double> lags;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto parent = b.parents[i];
        if (parent != kBackground) {
            lags.push_back(events[i] - events[static_cast<std::size_t>(parent)]);
        }
    }
    return lags;
}

DpKernelStep sample_kernel_dp(const BranchingStructure& b, std::span<const double> events, double kappa, double T,
                              CrpState crp, const DpConfig& cfg, double alpha_dp, const LognormalMixture& current,
                              Rng& rng) {
    const std::vector<double> lags = triggering_lags(b, events);
    DpKernelStep step;
    step.crp = crp_sweep(lags, std::move(crp), cfg, alpha_dp, rng);
    LognormalMixture proposal = posterior_dp_draw(step.crp, alpha_dp, cfg, rng);
    step.log_acceptance = hazard_log_acceptance(events, kappa, T, proposal, current);
    step.accepted = std::log(rng.uniform()) < step.log_acceptance;
    step.kernel = step.accepted ? std::move(proposal) : current;
    return step;
}

HawkesChainResult run_hawkes_chain(std::span<const double> times, double T, KernelModel model,
                                   const PriorConfig& priors, const ChainConfig& cfg, std::uint64_t seed) {
    priors.validate();
    cfg.validate();
    if (times.empty()) {
        throw DataError("cannot fit a Hawkes process to an empty event series");
    }
    if (!(T > 0.0) || times.back() > T || times.front() < 0.0) {
        throw DataError("event times must lie in the window [0, T]");
    }
    std::vector<ChainRun> runs(cfg.chains);
    parallel_for(cfg.chains, cfg.threads,
                 [&](std::size_t c) { runs[c] = run_single_chain(times, T, model, priors, cfg, c, seed); });

    HawkesChainResult result;
    result.model = model;
    std::size_t proposals = 0;
    std::size_t accepts = 0;
    for (auto& run : runs) {
        proposals += run.kernel_proposals;
        accepts += run.kernel_accepts;
        std::move(run.draws.begin(), run.draws.end(), std::back_inserter(result.draws));
    }
    result.kernel_acceptance = proposals ? static_cast<double>(accepts) / static_cast<double>(proposals) : 0.0;
    return result;
}

HawkesChainResult run_hawkes_chain(const MarkedEventSeries& series, KernelModel model, const PriorConfig& priors,
                                   const ChainConfig& cfg, std::uint64_t seed) {
    std::vector<double> times(series.times.size());
    std::transform(series.times.begin(), series.times.end(), times.begin(),
                   [s = series.window_start](double t) { return t - s; });
    return run_hawkes_chain(times, series.window_end - series.window_start, model, priors, cfg, seed);
}

std::vector<std::size_t> evenly_spaced_indices(std::size_t n, std::size_t count) {
    std::vector<std::size_t> out;
    if (n == 0 || count == 0) {
        return out;
    }
    if (count >= n) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(i);
        return out;
    }
    if (count == 1) {
        return {n - 1};
    }
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(static_cast<std::size_t>(
            std::llround(static_cast<double>(k) * static_cast<double>(n - 1) / static_cast<double>(count - 1))));
    }
    return out;
}

}  // namespace hpot
