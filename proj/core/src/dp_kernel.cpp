#include "hpot/dp_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hpot/numeric.hpp"

namespace hpot {

namespace {

struct SufficientStats {
    std::size_t count{0};
    double sum{0.0};
    double sum_sq{0.0};

    void add(double z) {
        ++count;
        sum += z;
        sum_sq += z * z;
    }
    void remove(double z) {
        --count;
        sum -= z;
        sum_sq -= z * z;
    }
};

CrpComponent draw_component(const NigParams& nig, std::size_t count, Rng& rng) {
    const double variance = 1.0 / rng.gamma(nig.a, nig.b);
    const double mean = rng.normal(nig.mu, std::sqrt(variance / nig.k));
    return {mean, variance, count};
}

}  // namespace

void DpConfig::validate() const {
    if (!(alpha_shape > 0.0 && alpha_rate > 0.0 && k0 > 0.0 && a0 > 0.0 && b0 > 0.0) || !std::isfinite(mu0)) {
        throw std::invalid_argument("DP hyperparameters must be positive (mu0 finite)");
    }
    if (truncation < 1) {
        throw std::invalid_argument("stick-breaking truncation must be at least 1");
    }
}

NigParams nig_prior(const DpConfig& cfg) {
    return {cfg.mu0, cfg.k0, cfg.a0, cfg.b0};
}

NigParams nig_posterior(const DpConfig& cfg, std::size_t count, double sum, double sum_sq) {
    if (count == 0) {
        return nig_prior(cfg);
    }
    const double n = static_cast<double>(count);
    const double xbar = sum / n;
    const double ss = std::max(0.0, sum_sq - n * xbar * xbar);
    const double kn = cfg.k0 + n;
    const double d = xbar - cfg.mu0;
    return {
        (cfg.k0 * cfg.mu0 + sum) / kn,
        kn,
        cfg.a0 + 0.5 * n,
        cfg.b0 + 0.5 * ss + cfg.k0 * n * d * d / (2.0 * kn),
    };
}

double nig_log_predictive(const NigParams& nig, double z) {
    const double nu = 2.0 * nig.a;
    const double scale_sq = nig.b * (nig.k + 1.0) / (nig.a * nig.k);
    const double r = (z - nig.mu);
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi * scale_sq) -
           0.5 * (nu + 1.0) * std::log1p(r * r / (nu * scale_sq));
}

void CrpState::validate() const {
    std::vector<std::size_t> counts(components.size(), 0);
    for (auto l : labels) {
        if (l == kUnseated) continue;
        if (l < 0 || static_cast<std::size_t>(l) >= components.size()) {
            throw std::invalid_argument("CRP label out of range");
        }
        ++counts[static_cast<std::size_t>(l)];
    }
    for (std::size_t c = 0; c < components.size(); ++c) {
        if (counts[c] != components[c].count || counts[c] == 0) {
            throw std::invalid_argument("CRP component counts inconsistent with labels");
        }
    }
}

CrpState crp_sweep(std::span<const double> lags, CrpState state, const DpConfig& cfg, double alpha_dp, Rng& rng) {
    const std::size_t n = lags.size();
    if (state.labels.size() != n) {
        throw std::invalid_argument("CRP state must carry one label per lag");
    }
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lags[i] > 0.0)) {
            throw std::invalid_argument("triggering lags must be positive");
        }
        z[i] = std::log(lags[i]);
    }

    // Compact the incoming labels onto occupied components.
    std::vector<std::int32_t> remap(state.components.size(), kUnseated);
    std::vector<SufficientStats> stats;
    for (std::size_t i = 0; i < n; ++i) {
        auto& label = state.labels[i];
        if (label == kUnseated) continue;
        if (label < 0 || static_cast<std::size_t>(label) >= remap.size()) {
            label = kUnseated;
            continue;
        }
        auto& target = remap[static_cast<std::size_t>(label)];
        if (target == kUnseated) {
            target = static_cast<std::int32_t>(stats.size());
            stats.emplace_back();
        }
        label = target;
        stats[static_cast<std::size_t>(label)].add(z[i]);
    }

    const NigParams prior = nig_prior(cfg);
    const double log_alpha = std::log(alpha_dp);
    std::vector<double> log_w;
    for (std::size_t i = 0; i < n; ++i) {
        auto& label = state.labels[i];
        if (label != kUnseated) {
            auto& s = stats[static_cast<std::size_t>(label)];
            s.remove(z[i]);
            if (s.count == 0) {
                const auto last = static_cast<std::int32_t>(stats.size() - 1);
                if (label != last) {
                    stats[static_cast<std::size_t>(label)] = stats.back();
                    for (auto& other : state.labels) {
                        if (other == last) other = label;
                    }
                }
                stats.pop_back();
            }
            label = kUnseated;
        }
        log_w.resize(stats.size() + 1);
        for (std::size_t c = 0; c < stats.size(); ++c) {
            const auto& s = stats[c];
            log_w[c] = std::log(static_cast<double>(s.count)) +
                       nig_log_predictive(nig_posterior(cfg, s.count, s.sum, s.sum_sq), z[i]);
        }
        log_w.back() = log_alpha + nig_log_predictive(prior, z[i]);
        const double max = *std::max_element(log_w.begin(), log_w.end());
        double total = 0.0;
        for (double& w : log_w) {
            w = std::exp(w - max);
            total += w;
        }
        const std::size_t pick = rng.categorical(log_w, total);
        if (pick == stats.size()) {
            stats.emplace_back();
        }
        label = static_cast<std::int32_t>(pick);
        stats[pick].add(z[i]);
    }

    state.components.clear();
    state.components.reserve(stats.size());
    for (const auto& s : stats) {
        state.components.push_back(draw_component(nig_posterior(cfg, s.count, s.sum, s.sum_sq), s.count, rng));
    }
    return state;
}

double sample_concentration(double alpha_dp, std::size_t n_lags, std::size_t n_components, const DpConfig& cfg,
                            Rng& rng) {
    if (n_lags == 0) {
        return rng.gamma(cfg.alpha_shape, cfg.alpha_rate);
    }
    const double n = static_cast<double>(n_lags);
    const double k = static_cast<double>(n_components);
    const double eta = rng.beta(alpha_dp + 1.0, n);
    const double rate = cfg.alpha_rate - std::log(eta);
    const double odds = (cfg.alpha_shape + k - 1.0) / (n * rate);
    const double pi = odds / (1.0 + odds);
    const double shape = rng.uniform() < pi ? cfg.alpha_shape + k : cfg.alpha_shape + k - 1.0;
    return rng.gamma(std::max(shape, 1e-12), rate);
}

std::vector<double> stick_breaking_weights(std::span<const double> fractions) {
    std::vector<double> w(fractions.size());
    double remaining = 1.0;
    for (std::size_t l = 0; l < fractions.size(); ++l) {
        if (l + 1 == fractions.size()) {
            w[l] = remaining;  // v_L * remaining plus the residual (1 - v_L) * remaining
            break;
        }
        w[l] = fractions[l] * remaining;
        remaining *= 1.0 - fractions[l];
    }
    return w;
}

LognormalMixture posterior_dp_draw(const CrpState& state, double alpha_dp, const DpConfig& cfg, Rng& rng) {
    if (!(alpha_dp > 0.0)) {
        throw std::invalid_argument("DP concentration must be positive");
    }
    std::size_t n = 0;
    for (const auto& c : state.components) {
        n += c.count;
    }
    const double alpha_post = alpha_dp + static_cast<double>(n);
    const double p_base = alpha_dp / alpha_post;
    const std::size_t L = cfg.truncation;

    std::vector<double> fractions(L);
    for (auto& v : fractions) {
        v = -std::expm1(std::log(rng.uniform()) / alpha_post);  // Beta(1, alpha')
    }
    const std::vector<double> w = stick_breaking_weights(fractions);

    std::vector<double> occupied_weight(state.components.size(), 0.0);
    LognormalMixture base_atoms;
    const NigParams prior = nig_prior(cfg);
    const double n_d = static_cast<double>(n);
    for (std::size_t l = 0; l < L; ++l) {
        if (n == 0 || rng.uniform() < p_base) {
            const CrpComponent atom = draw_component(prior, 0, rng);
            base_atoms.weights.push_back(w[l]);
            base_atoms.locations.push_back(atom.mean);
            base_atoms.scales.push_back(std::sqrt(atom.variance));
        } else {
            const double target = rng.uniform() * n_d;
            double acc = 0.0;
            std::size_t c = 0;
            for (; c + 1 < state.components.size(); ++c) {
                acc += static_cast<double>(state.components[c].count);
                if (target < acc) break;
            }
            occupied_weight[c] += w[l];
        }
    }

    LognormalMixture out;
    out.truncation = L;
    for (std::size_t c = 0; c < state.components.size(); ++c) {
        if (occupied_weight[c] <= 0.0) continue;
        out.weights.push_back(occupied_weight[c]);
        out.locations.push_back(state.components[c].mean);
        out.scales.push_back(std::sqrt(state.components[c].variance));
    }
    out.weights.insert(out.weights.end(), base_atoms.weights.begin(), base_atoms.weights.end());
    out.locations.insert(out.locations.end(), base_atoms.locations.begin(), base_atoms.locations.end());
    out.scales.insert(out.scales.end(), base_atoms.scales.begin(), base_atoms.scales.end());
    return out;
}

LognormalMixture prior_dp_draw(double alpha_dp, const DpConfig& cfg, Rng& rng) {
    return posterior_dp_draw(CrpState{}, alpha_dp, cfg, rng);
}

}  // namespace hpot
