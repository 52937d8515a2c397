#include "hpot/marks.hpp"

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

double std_normal_log(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double log_prior_hyper(const GpdHierState& s, const GpdPriors& priors, MarkModel model) {
    if (!(s.xi > priors.xi_lower) || s.tau_sigma < 0.0) {
        return kNegInf;
    }
    double lp = normal_logpdf(s.log_sigma0, priors.log_sigma0_mean, priors.log_sigma0_sd) +
                normal_logpdf(s.xi, 0.0, priors.xi_sd);
    if (model == MarkModel::hierarchical) {
        lp += normal_logpdf(s.tau_sigma, 0.0, priors.tau_sd) + std::log(2.0);
    }
    return lp;
}

double range_loglik(std::span<const double> y, std::size_t first, std::size_t last, double log_sigma, double xi) {
    const GpdParams p{std::exp(log_sigma), xi};
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
        return kNegInf;
    }
    double total = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        const double v = gpd_logpdf(y[i], p);
        if (!(v > kLogDensityFloor)) {
            return kNegInf;
        }
        total += v;
    }
    return total;
}

// Robbins-Monro scale on the log scale, frozen after warm-up.
struct ProposalScale {
    double log_sd;

    explicit ProposalScale(double sd) : log_sd(std::log(sd)) {}
    [[nodiscard]] double sd() const { return std::exp(log_sd); }
    void adapt(double accept_prob, std::size_t iteration) {
        const double gain = std::min(0.5, std::pow(static_cast<double>(iteration + 1), -0.6));
        log_sd = std::clamp(log_sd + gain * (accept_prob - 0.44), std::log(1e-5), std::log(20.0));
    }
};

class MarkChain {
public:
    MarkChain(std::span<const double> y, const ClusterPartition& partition, const GpdPriors& priors, MarkModel model)
        : y_(y), partition_(partition), priors_(priors), model_(model), cluster_ll_(partition.cluster_count()) {
        const std::size_t K = partition.cluster_count();
        s_.z.assign(K, 0.0);
        s_.xi = 0.1;
        s_.tau_sigma = model == MarkModel::hierarchical ? 0.25 : 0.0;
        s_.log_sigma0 = y.empty() ? priors.log_sigma0_mean : std::log(mean(y));
        refresh();
        if (!std::isfinite(total_ll_)) {
            throw NumericalError("mark sampler initial state has zero likelihood");
        }
    }

    void iterate(Rng& rng, bool adapt, std::size_t it) {
        if (model_ == MarkModel::hierarchical) {
            update_z(rng, adapt, it);
        }
        update_log_sigma0(rng, adapt, it);
        if (model_ == MarkModel::hierarchical) {
            update_log_tau(rng, adapt, it);
        }
        update_xi(rng, adapt, it);
        if (model_ == MarkModel::hierarchical && s_.tau_sigma > 0.0 && !s_.z.empty()) {
            shift_move(rng, adapt, it);
            scale_move(rng, adapt, it);
        }
    }

    [[nodiscard]] const GpdHierState& state() const { return s_; }

private:
    void refresh() {
        total_ll_ = 0.0;
        for (std::size_t k = 0; k < cluster_ll_.size(); ++k) {
            const auto [first, last] = partition_.range(k);
            cluster_ll_[k] = range_loglik(y_, first, last, s_.cluster_log_sigma(k), s_.xi);
            total_ll_ += cluster_ll_[k];
        }
    }

    // Log-likelihood of a candidate with per-cluster values written to `out`.
    double evaluate(const GpdHierState& c, std::vector<double>& out) const {
        out.resize(cluster_ll_.size());
        double total = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const auto [first, last] = partition_.range(k);
            out[k] = range_loglik(y_, first, last, c.cluster_log_sigma(k), c.xi);
            if (!std::isfinite(out[k])) {
                return kNegInf;
            }
            total += out[k];
        }
        return total;
    }

    // MH step on a candidate that changes hyperparameters (and possibly every cluster).
    bool accept_full(GpdHierState& cand, double extra_log_ratio, Rng& rng, double& accept_prob) {
        const double lp_new = log_prior_hyper(cand, priors_, model_);
        if (!(lp_new > kLogDensityFloor)) {
            accept_prob = 0.0;
            return false;
        }
        const double ll_new = evaluate(cand, scratch_);
        if (!(ll_new > kLogDensityFloor)) {
            accept_prob = 0.0;
            return false;
        }
        const double log_a = ll_new + lp_new - total_ll_ - log_prior_hyper(s_, priors_, model_) + extra_log_ratio;
        accept_prob = log_a >= 0.0 ? 1.0 : std::exp(log_a);
        if (std::log(rng.uniform()) < log_a) {
            s_ = std::move(cand);
            cluster_ll_.swap(scratch_);
            total_ll_ = ll_new;
            return true;
        }
        return false;
    }

    void update_z(Rng& rng, bool adapt, std::size_t it) {
        double prob_sum = 0.0;
        for (std::size_t k = 0; k < s_.z.size(); ++k) {
            const double proposed = s_.z[k] + z_scale_.sd() * rng.normal();
            const auto [first, last] = partition_.range(k);
            const double ll = range_loglik(y_, first, last, s_.log_sigma0 + s_.tau_sigma * proposed, s_.xi);
            double log_a = kNegInf;
            if (ll > kLogDensityFloor) {
                log_a = ll - cluster_ll_[k] + std_normal_log(proposed) - std_normal_log(s_.z[k]);
            }
            prob_sum += log_a >= 0.0 ? 1.0 : std::exp(log_a);
            if (std::log(rng.uniform()) < log_a) {
                total_ll_ += ll - cluster_ll_[k];
                cluster_ll_[k] = ll;
                s_.z[k] = proposed;
            }
        }
        if (adapt && !s_.z.empty()) {
            z_scale_.adapt(prob_sum / static_cast<double>(s_.z.size()), it);
        }
    }

    void update_log_sigma0(Rng& rng, bool adapt, std::size_t it) {
        GpdHierState cand = s_;
        cand.log_sigma0 += sigma0_scale_.sd() * rng.normal();
        double prob = 0.0;
        accept_full(cand, 0.0, rng, prob);
        if (adapt) sigma0_scale_.adapt(prob, it);
    }

    void update_log_tau(Rng& rng, bool adapt, std::size_t it) {
        GpdHierState cand = s_;
        const double step = tau_scale_.sd() * rng.normal();
        cand.tau_sigma = s_.tau_sigma * std::exp(step);
        double prob = 0.0;
        // Jacobian of the log transform.
        accept_full(cand, step, rng, prob);
        if (adapt) tau_scale_.adapt(prob, it);
    }

    void update_xi(Rng& rng, bool adapt, std::size_t it) {
        GpdHierState cand = s_;
        cand.xi += xi_scale_.sd() * rng.normal();
        double prob = 0.0;
        if (cand.xi > priors_.xi_lower) {
            accept_full(cand, 0.0, rng, prob);
        }
        if (adapt) xi_scale_.adapt(prob, it);
    }

    // (log sigma0 + d, z - d / tau): cluster scales are unchanged, so only priors enter.
    void shift_move(Rng& rng, bool adapt, std::size_t it) {
        const double d = shift_scale_.sd() * rng.normal();
        double log_a = normal_logpdf(s_.log_sigma0 + d, priors_.log_sigma0_mean, priors_.log_sigma0_sd) -
                       normal_logpdf(s_.log_sigma0, priors_.log_sigma0_mean, priors_.log_sigma0_sd);
        const double dz = d / s_.tau_sigma;
        for (double z : s_.z) {
            log_a += std_normal_log(z - dz) - std_normal_log(z);
        }
        const double prob = log_a >= 0.0 ? 1.0 : std::exp(log_a);
        if (std::log(rng.uniform()) < log_a) {
            s_.log_sigma0 += d;
            for (double& z : s_.z) z -= dz;
            refresh();
        }
        if (adapt) shift_scale_.adapt(prob, it);
    }

    // (log tau + e, z * exp(-e)) with Jacobian exp(-K e); tau * z is unchanged.
    void scale_move(Rng& rng, bool adapt, std::size_t it) {
        const double e = scale_scale_.sd() * rng.normal();
        const double tau_new = s_.tau_sigma * std::exp(e);
        const double shrink = std::exp(-e);
        double log_a = normal_logpdf(tau_new, 0.0, priors_.tau_sd) - normal_logpdf(s_.tau_sigma, 0.0, priors_.tau_sd) +
                       e - static_cast<double>(s_.z.size()) * e;
        for (double z : s_.z) {
            log_a += std_normal_log(z * shrink) - std_normal_log(z);
        }
        const double prob = log_a >= 0.0 ? 1.0 : std::exp(log_a);
        if (std::log(rng.uniform()) < log_a) {
            s_.tau_sigma = tau_new;
            for (double& z : s_.z) z *= shrink;
            refresh();
        }
        if (adapt) scale_scale_.adapt(prob, it);
    }

    std::span<const double> y_;
    const ClusterPartition& partition_;
    const GpdPriors& priors_;
    MarkModel model_;
    GpdHierState s_;
    std::vector<double> cluster_ll_;
    std::vector<double> scratch_;
    double total_ll_{0.0};
    ProposalScale z_scale_{1.0};
    ProposalScale sigma0_scale_{0.2};
    ProposalScale tau_scale_{0.5};
    ProposalScale xi_scale_{0.1};
    ProposalScale shift_scale_{0.5};
    ProposalScale scale_scale_{0.3};
};

}  // namespace

void MarkChainConfig::validate() const {
    if (iterations == 0 || warmup >= iterations || chains == 0) {
        throw std::invalid_argument("mark chain configuration needs iterations > warmup and at least one chain");
    }
}

double mark_log_posterior(const GpdHierState& s, std::span<const double> scaled, const ClusterPartition& partition,
                          const GpdPriors& priors, MarkModel model) {
    if (model == MarkModel::iid && s.tau_sigma != 0.0) {
        throw std::invalid_argument("iid mark model requires tau_sigma = 0");
    }
    if (s.z.size() != partition.cluster_count()) {
        throw std::invalid_argument("mark state needs one z per cluster");
    }
    double lp = log_prior_hyper(s, priors, model);
    if (!(lp > kLogDensityFloor)) {
        return kNegInf;
    }
    for (std::size_t k = 0; k < partition.cluster_count(); ++k) {
        if (model == MarkModel::hierarchical) {
            lp += std_normal_log(s.z[k]);
        }
        const auto [first, last] = partition.range(k);
        const double ll = range_loglik(scaled, first, last, s.cluster_log_sigma(k), s.xi);
        if (!(ll > kLogDensityFloor)) {
            return kNegInf;
        }
        lp += ll;
    }
    return lp;
}

std::vector<GpdHierState> sample_mark_posterior(std::span<const double> scaled, const ClusterPartition& partition,
                                                const GpdPriors& priors, MarkModel model,
                                                const MarkChainConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (!scaled.empty() && partition.assignment.size() != scaled.size()) {
        throw std::invalid_argument("partition does not match the number of excesses");
    }
    for (double y : scaled) {
        if (!(y > 0.0) || !std::isfinite(y)) {
            throw DataError("mark model needs strictly positive finite excesses");
        }
    }
    const std::size_t per_chain = cfg.iterations - cfg.warmup;
    std::vector<std::vector<GpdHierState>> chains(cfg.chains);
    parallel_for(cfg.chains, cfg.threads, [&](std::size_t c) {
        Rng rng = Rng::derive(seed, {c});
        MarkChain chain(scaled, partition, priors, model);
        chains[c].reserve(per_chain);
        for (std::size_t it = 0; it < cfg.iterations; ++it) {
            const bool warm = it < cfg.warmup;
            chain.iterate(rng, warm, it);
            if (!warm) chains[c].push_back(chain.state());
        }
    });
    std::vector<GpdHierState> all;
    all.reserve(per_chain * cfg.chains);
    for (auto& c : chains) {
        std::move(c.begin(), c.end(), std::back_inserter(all));
    }
    if (cfg.keep == 0 || cfg.keep >= all.size()) {
        return all;
    }
    std::vector<GpdHierState> kept;
    kept.reserve(cfg.keep);
    for (std::size_t i : evenly_spaced_indices(all.size(), cfg.keep)) {
        kept.push_back(std::move(all[i]));
    }
    return kept;
}

MarkFit fit_marks_hierarchical(const MarkedEventSeries& series, std::span<const PosteriorDraw> draws,
                               std::span<const std::size_t> representative, MarkModel model,
                               const GpdPriors& priors, const MarkChainConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    series.validate();
    const std::vector<double> scaled = series.scaled_excesses();
    std::vector<double> times(series.times.size());
    std::transform(series.times.begin(), series.times.end(), times.begin(),
                   [s = series.window_start](double t) { return t - s; });
    const double T = series.window_end - series.window_start;

    MarkFit fit;
    fit.model = model;
    fit.scale_factor = series.scale_factor;
    fit.entries.resize(representative.size());
    MarkChainConfig inner = cfg;
    inner.threads = 1;
    parallel_for(representative.size(), cfg.threads, [&](std::size_t r) {
        const std::size_t idx = representative[r];
        if (idx >= draws.size()) {
            throw std::out_of_range("representative draw index out of range");
        }
        const PosteriorDraw& d = draws[idx];
        if (d.branching.size() != times.size()) {
            throw std::invalid_argument("branching does not match the mark series");
        }
        MarkFitEntry& e = fit.entries[r];
        e.draw_index = idx;
        e.draw_chain = d.chain;
        e.draw_iteration = d.iteration;
        e.partition = clusters_from_branching(d.branching, times, T);
        e.states = sample_mark_posterior(scaled, e.partition, priors, model, inner, derive_seed(seed, {idx}));
    });
    return fit;
}

}  // namespace hpot
