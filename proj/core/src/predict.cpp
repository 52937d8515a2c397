#include "hpot/predict.hpp"

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

enum StreamKey : std::uint64_t { kStreamHawkes = 1, kStreamMarks = 2, kStreamScore = 3 };

std::uint64_t model_key(const ModelSpec& spec) {
    return static_cast<std::uint64_t>(spec.kernel) * 2 + static_cast<std::uint64_t>(spec.marks);
}

double gpd_sum(std::span<const double> y, double sigma, double xi) {
    const GpdParams p{sigma, xi};
    double total = 0.0;
    for (double v : y) {
        total += gpd_logpdf(v, p);
    }
    return total;
}

void check_test_window(const MarkedEventSeries& train, const MarkedEventSeries& test) {
    if (!(test.window_end >= test.window_start)) {
        throw DataError("test window is empty or reversed");
    }
    if (!train.times.empty() && train.times.back() > test.window_start) {
        throw DataError("training events extend past the start of the test window");
    }
    if (!test.times.empty() && (test.times.front() <= test.window_start || test.times.back() > test.window_end)) {
        throw DataError("test events must lie in (T, T_end]");
    }
}

}  // namespace

double PredictivePath::max_excess() const {
    return excesses.empty() ? 0.0 : *std::max_element(excesses.begin(), excesses.end());
}

PredictivePath forward_simulate(const HawkesParams& hawkes, const GpdHierState& marks,
                                const ClusterPartition& partition, const MarkedEventSeries& history, double horizon,
                                Rng& rng) {
    PredictivePath out;
    if (!(horizon > 0.0)) {
        return out;
    }
    if (partition.assignment.size() != history.size() || marks.z.size() != partition.cluster_count()) {
        throw std::invalid_argument("mark state, partition and history disagree");
    }
    const double T = history.window_end;
    SimulatedPath sim = simulate(hawkes, T, T + horizon, history.times, rng);
    out.times = std::move(sim.times);
    out.parents = std::move(sim.parents);
    out.excesses.reserve(out.times.size());
    out.clusters.reserve(out.times.size());

    const bool has_history_cluster = partition.cluster_count() > 0;
    ClusterRef current{false, has_history_cluster ? partition.cluster_count() - 1 : 0};
    double log_sigma = has_history_cluster ? marks.cluster_log_sigma(current.id) : marks.log_sigma0;
    std::size_t new_clusters = 0;
    for (std::size_t i = 0; i < out.times.size(); ++i) {
        if (out.parents[i] == kBackground) {
            current = ClusterRef{true, new_clusters++};
            log_sigma = marks.log_sigma0 + marks.tau_sigma * rng.normal();
        }
        out.clusters.push_back(current);
        out.excesses.push_back(gpd_sample({std::exp(log_sigma), marks.xi}, rng) * history.scale_factor);
    }
    return out;
}

PredictiveSummary predictive_summaries(std::span<const PredictivePath> paths, std::span<const double> levels) {
    if (paths.empty()) {
        throw std::invalid_argument("predictive summaries need at least one path");
    }
    PredictiveSummary s;
    s.paths = paths.size();
    s.levels.assign(levels.begin(), levels.end());
    s.exceedance_prob.assign(levels.size(), 0.0);
    std::vector<double> maxima;
    std::size_t total_count = 0;
    for (const auto& path : paths) {
        const std::size_t n = path.size();
        if (s.count_pmf.size() <= n) s.count_pmf.resize(n + 1, 0.0);
        s.count_pmf[n] += 1.0;
        total_count += n;
        if (n == 0) continue;
        const double m = path.max_excess();
        maxima.push_back(m);
        for (std::size_t l = 0; l < levels.size(); ++l) {
            if (m > levels[l]) s.exceedance_prob[l] += 1.0;
        }
    }
    const double np = static_cast<double>(paths.size());
    for (double& v : s.count_pmf) v /= np;
    for (double& v : s.exceedance_prob) v /= np;
    s.count_mean = static_cast<double>(total_count) / np;
    s.nonempty_paths = maxima.size();
    if (maxima.empty()) {
        s.max_median = s.max_lower = s.max_upper = std::numeric_limits<double>::quiet_NaN();
    } else {
        std::sort(maxima.begin(), maxima.end());
        s.max_median = quantile_sorted(maxima, 0.5);
        s.max_lower = quantile_sorted(maxima, 0.05);
        s.max_upper = quantile_sorted(maxima, 0.95);
    }
    return s;
}

double path_time_loglik(const HawkesParams& p, std::span<const double> history, std::span<const double> test_times,
                        double T, double T_end) {
    std::vector<double> events(history.begin(), history.end());
    events.insert(events.end(), test_times.begin(), test_times.end());
    const CompiledKernel h(p.kernel);
    double total = 0.0;
    const std::size_t n_hist = history.size();
    for (std::size_t i = n_hist; i < events.size(); ++i) {
        double excite = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            excite += h.density(events[i] - events[j]);
        }
        const double lambda = p.mu + p.kappa * excite;
        if (!(lambda > 0.0)) {
            return kNegInf;
        }
        total += std::log(lambda);
    }
    return total - compensator_between(T, T_end, events, p);
}

LogScore heldout_time_logscore(std::span<const PosteriorDraw> draws, const MarkedEventSeries& train,
                               const MarkedEventSeries& test) {
    if (draws.empty()) {
        throw std::invalid_argument("time score needs at least one posterior draw");
    }
    check_test_window(train, test);
    std::vector<double> values(draws.size());
    for (std::size_t s = 0; s < draws.size(); ++s) {
        values[s] = path_time_loglik(draws[s].hawkes, train.times, test.times, test.window_start, test.window_end);
    }
    return LogScore{log_mean_exp(values), log_mean_exp_standard_error(values), values.size()};
}

double mark_path_logdensity(const PosteriorDraw& draw, const GpdHierState& state, const ClusterPartition& partition,
                            std::span<const double> train_times, const MarkedEventSeries& test, std::size_t z_draws,
                            Rng& rng) {
    const std::size_t n_train = train_times.size();
    const std::size_t n_test = test.size();
    if (n_test == 0) {
        return 0.0;
    }
    if (draw.branching.size() != n_train || partition.assignment.size() != n_train) {
        throw std::invalid_argument("posterior draw does not match the training series");
    }
    const double c = test.scale_factor;
    std::vector<double> events(train_times.begin(), train_times.end());
    events.insert(events.end(), test.times.begin(), test.times.end());
    BranchingStructure b = draw.branching;
    sample_branching_from(events, n_train, draw.hawkes, rng, b);

    // Groups of consecutive test events sharing a cluster; group 0 may continue training.
    double total = 0.0;
    std::vector<double> group;
    bool group_is_new = n_train == 0;
    const auto flush = [&] {
        if (group.empty()) return;
        if (!group_is_new) {
            total += gpd_sum(group, state.cluster_sigma(partition.cluster_count() - 1), state.xi);
        } else if (state.tau_sigma == 0.0 || z_draws == 0) {
            total += gpd_sum(group, std::exp(state.log_sigma0), state.xi);
        } else {
            std::vector<double> mc(z_draws);
            for (double& v : mc) {
                v = gpd_sum(group, std::exp(state.log_sigma0 + state.tau_sigma * rng.normal()), state.xi);
            }
            total += log_mean_exp(mc);
        }
        group.clear();
    };
    for (std::size_t i = 0; i < n_test; ++i) {
        if (b.parents[n_train + i] == kBackground) {
            flush();
            group_is_new = true;
        }
        group.push_back(test.excesses[i] / c);
    }
    flush();
    return total - static_cast<double>(n_test) * std::log(c);
}

LogScore heldout_mark_logscore(std::span<const PosteriorDraw> draws, const MarkFit& fit,
                               const MarkedEventSeries& train, const MarkedEventSeries& test, std::size_t z_draws,
                               std::uint64_t seed) {
    check_test_window(train, test);
    if (test.scale_factor != train.scale_factor) {
        throw DataError("test excesses must use the training scale factor");
    }
    std::vector<double> values;
    for (std::size_t r = 0; r < fit.entries.size(); ++r) {
        const MarkFitEntry& e = fit.entries[r];
        if (e.draw_index >= draws.size()) {
            throw std::out_of_range("mark fit refers to a missing posterior draw");
        }
        for (std::size_t s = 0; s < e.states.size(); ++s) {
            Rng rng = Rng::derive(seed, {e.draw_index, s});
            values.push_back(mark_path_logdensity(draws[e.draw_index], e.states[s], e.partition, train.times, test,
                                                  z_draws, rng));
        }
    }
    if (values.empty()) {
        throw std::invalid_argument("mark score needs at least one fitted mark state");
    }
    return LogScore{log_mean_exp(values), log_mean_exp_standard_error(values), values.size()};
}

std::string ModelSpec::name() const {
    return to_string(kernel) + "+" + to_string(marks);
}

std::vector<ModelSpec> model_grid() {
    return {{KernelModel::exponential, MarkModel::iid},
            {KernelModel::exponential, MarkModel::hierarchical},
            {KernelModel::dirichlet_process, MarkModel::iid},
            {KernelModel::dirichlet_process, MarkModel::hierarchical}};
}

ModelSpec parse_model(const std::string& name) {
    for (const auto& m : model_grid()) {
        if (m.name() == name) return m;
    }
    throw UsageError("unknown model '" + name + "' (expected Exp+iid, Exp+hier, DP+iid or DP+hier)");
}

void ScoringConfig::validate() const {
    priors.validate();
    chain.validate();
    mark_chain.validate();
    if (representative_draws == 0 || score_draws == 0) {
        throw std::invalid_argument("representative and scoring draw counts must be positive");
    }
}

std::uint64_t hawkes_seed(std::uint64_t root, KernelModel kernel) {
    return derive_seed(root, {kStreamHawkes, static_cast<std::uint64_t>(kernel)});
}

std::uint64_t marks_seed(std::uint64_t root, const ModelSpec& spec) {
    return derive_seed(root, {kStreamMarks, model_key(spec)});
}

std::uint64_t scoring_seed(std::uint64_t root, const ModelSpec& spec) {
    return derive_seed(root, {kStreamScore, model_key(spec)});
}

MarkFit fit_marks_for(const MarkedEventSeries& train, const HawkesChainResult& hawkes,
                      std::span<const std::size_t> representative, const ModelSpec& spec, const ScoringConfig& cfg,
                      std::uint64_t seed) {
    MarkChainConfig mc = cfg.mark_chain;
    mc.threads = cfg.threads;
    return fit_marks_hierarchical(train, hawkes.draws, representative, spec.marks, cfg.priors.gpd, mc,
                                  marks_seed(seed, spec));
}

FittedModel fit_model(const MarkedEventSeries& train, const ModelSpec& spec, const ScoringConfig& cfg,
                      std::uint64_t seed) {
    cfg.validate();
    FittedModel m;
    m.spec = spec;
    ChainConfig chain = cfg.chain;
    chain.threads = cfg.threads;
    m.hawkes = run_hawkes_chain(train, spec.kernel, cfg.priors, chain, hawkes_seed(seed, spec.kernel));
    m.representative = evenly_spaced_indices(m.hawkes.draws.size(), cfg.representative_draws);
    m.marks = fit_marks_for(train, m.hawkes, m.representative, spec, cfg, seed);
    return m;
}

ScoreReport score_fitted(const FittedModel& model, const MarkedEventSeries& train, const MarkedEventSeries& test,
                         const ScoringConfig& cfg, std::uint64_t seed) {
    const auto& draws = model.hawkes.draws;
    std::vector<PosteriorDraw> subset;
    for (std::size_t i : evenly_spaced_indices(draws.size(), cfg.score_draws)) {
        subset.push_back(draws[i]);
    }
    ScoreReport r;
    r.spec = model.spec;
    r.time = heldout_time_logscore(subset, train, test);
    r.mark = heldout_mark_logscore(draws, model.marks, train, test, cfg.z_draws, scoring_seed(seed, model.spec));
    r.combined = r.time.value + r.mark.value;
    r.combined_se = std::hypot(r.time.standard_error, r.mark.standard_error);
    r.train_events = train.size();
    r.test_events = test.size();
    r.scale_factor = train.scale_factor;
    return r;
}

void apply_baseline_deltas(std::span<ScoreReport> reports) {
    const ModelSpec baseline{KernelModel::exponential, MarkModel::iid};
    const auto it = std::find_if(reports.begin(), reports.end(), [&](const ScoreReport& r) { return r.spec == baseline; });
    if (it == reports.end()) return;
    const double base = it->combined;
    for (auto& r : reports) {
        r.delta = r.spec == baseline ? 0.0 : r.combined - base;
    }
}

std::vector<ScoreReport> score_models(const MarkedEventSeries& train, const MarkedEventSeries& test,
                                      std::span<const ModelSpec> grid, const ScoringConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::vector<ScoreReport> reports;
    for (KernelModel kernel : {KernelModel::exponential, KernelModel::dirichlet_process}) {
        std::vector<ModelSpec> members;
        for (const auto& m : grid) {
            if (m.kernel == kernel) members.push_back(m);
        }
        if (members.empty()) continue;
        FittedModel fitted;
        try {
            fitted = fit_model(train, members.front(), cfg, seed);
        } catch (const NumericalError& e) {
            throw NumericalError(members.front().name() + ": " + e.what());
        }
        for (std::size_t k = 0; k < members.size(); ++k) {
            try {
                if (k > 0) {
                    fitted.spec = members[k];
                    fitted.marks = fit_marks_for(train, fitted.hawkes, fitted.representative, members[k], cfg, seed);
                }
                reports.push_back(score_fitted(fitted, train, test, cfg, seed));
            } catch (const NumericalError& e) {
                throw NumericalError(members[k].name() + ": " + e.what());
            }
        }
    }
    // Report in grid order.
    std::vector<ScoreReport> ordered;
    for (const auto& m : grid) {
        const auto it = std::find_if(reports.begin(), reports.end(), [&](const ScoreReport& r) { return r.spec == m; });
        if (it != reports.end()) ordered.push_back(*it);
    }
    apply_baseline_deltas(ordered);
    return ordered;
}

std::vector<PredictivePath> simulate_predictive(const FittedModel& model, const MarkedEventSeries& train,
                                                double horizon, std::size_t paths, std::uint64_t seed) {
    const auto& entries = model.marks.entries;
    if (entries.empty()) {
        throw std::invalid_argument("fitted model has no representative mark fits");
    }
    std::vector<PredictivePath> out(paths);
    for (std::size_t j = 0; j < paths; ++j) {
        const MarkFitEntry& e = entries[j % entries.size()];
        const GpdHierState& state = e.states[(j / entries.size()) % e.states.size()];
        Rng rng = Rng::derive(seed, {j});
        out[j] = forward_simulate(model.hawkes.draws[e.draw_index].hawkes, state, e.partition, train, horizon, rng);
    }
    return out;
}

}  // namespace hpot
