#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpot/evt.hpp"
#include "hpot/hawkes.hpp"
#include "hpot/marks.hpp"
#include "hpot/mcmc.hpp"

namespace hpot {

/// Cluster lineage of a simulated or scored event: a training cluster that continues
/// into the future, or the n-th cluster started after the end of the history.
struct ClusterRef {
    bool is_new{false};
    std::size_t id{0};

    friend bool operator==(const ClusterRef&, const ClusterRef&) = default;
};

struct PredictivePath {
    std::vector<double> times;           // in (T, T + H], same clock as the history
    std::vector<double> excesses;        // original scale
    std::vector<std::int32_t> parents;   // into history ++ times, or kBackground
    std::vector<ClusterRef> clusters;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] double max_excess() const;  // 0 when empty
};

/// One future path under a Hawkes draw and a mark state fitted on the same branching.
/// `partition` is the cluster partition of that branching over the history events.
[[nodiscard]] PredictivePath forward_simulate(const HawkesParams& hawkes, const GpdHierState& marks,
                                              const ClusterPartition& partition, const MarkedEventSeries& history,
                                              double horizon, Rng& rng);

inline constexpr const char* kEmptyPathConvention =
    "paths without events are excluded from M_H quantiles and count as non-exceeding in Pr(M_H > z)";

struct PredictiveSummary {
    std::size_t paths{0};
    std::size_t nonempty_paths{0};
    std::vector<double> count_pmf;  // Pr(N_H = k), k = 0..max
    double count_mean{0.0};
    double max_median{0.0};  // NaN when every path is empty
    double max_lower{0.0};   // 5% quantile of M_H
    double max_upper{0.0};   // 95% quantile of M_H
    std::vector<double> levels;
    std::vector<double> exceedance_prob;  // Pr(M_H > level)
};

[[nodiscard]] PredictiveSummary predictive_summaries(std::span<const PredictivePath> paths,
                                                     std::span<const double> levels);

struct LogScore {
    double value{0.0};
    double standard_error{0.0};
    std::size_t draws{0};
};

/// Exact log-likelihood of the test times on (T, T_end] given all earlier events:
/// sum log lambda(t_i | history) - [Lambda(T_end) - Lambda(T)].
[[nodiscard]] double path_time_loglik(const HawkesParams& p, std::span<const double> history,
                                      std::span<const double> test_times, double T, double T_end);

/// Log-mean-exp of path_time_loglik over the given draws; `test` supplies the window
/// (window_start = T, window_end = T_end).
[[nodiscard]] LogScore heldout_time_logscore(std::span<const PosteriorDraw> draws, const MarkedEventSeries& train,
                                             const MarkedEventSeries& test);

/// Log density of the test excesses (original scale) under one Hawkes draw and one mark
/// state: the branching is extended over the test events by one allocation pass, test
/// events before the first new background event continue the last training cluster, and
/// z of every new cluster is integrated out with `z_draws` Monte Carlo draws.
[[nodiscard]] double mark_path_logdensity(const PosteriorDraw& draw, const GpdHierState& state,
                                          const ClusterPartition& partition, std::span<const double> train_times,
                                          const MarkedEventSeries& test, std::size_t z_draws, Rng& rng);

/// Log-mean-exp of mark_path_logdensity over every (representative draw, mark state) pair.
[[nodiscard]] LogScore heldout_mark_logscore(std::span<const PosteriorDraw> draws, const MarkFit& fit,
                                             const MarkedEventSeries& train, const MarkedEventSeries& test,
                                             std::size_t z_draws, std::uint64_t seed);

struct ModelSpec {
    KernelModel kernel{KernelModel::exponential};
    MarkModel marks{MarkModel::iid};

    [[nodiscard]] std::string name() const;  // "Exp+iid", "DP+hier", ...
    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// The four kernel x mark variants, baseline first.
[[nodiscard]] std::vector<ModelSpec> model_grid();
[[nodiscard]] ModelSpec parse_model(const std::string& name);

struct ScoringConfig {
    PriorConfig priors;
    ChainConfig chain;
    MarkChainConfig mark_chain;
    std::size_t representative_draws{100};
    std::size_t score_draws{500};  // Hawkes draws used for the time score
    std::size_t z_draws{32};
    std::size_t threads{1};

    void validate() const;
};

struct FittedModel {
    ModelSpec spec;
    HawkesChainResult hawkes;
    std::vector<std::size_t> representative;
    MarkFit marks;
};

/// Derived stream keys so that separately run fit and score steps use the same streams.
[[nodiscard]] std::uint64_t hawkes_seed(std::uint64_t root, KernelModel kernel);
[[nodiscard]] std::uint64_t marks_seed(std::uint64_t root, const ModelSpec& spec);
[[nodiscard]] std::uint64_t scoring_seed(std::uint64_t root, const ModelSpec& spec);

[[nodiscard]] MarkFit fit_marks_for(const MarkedEventSeries& train, const HawkesChainResult& hawkes,
                                    std::span<const std::size_t> representative, const ModelSpec& spec,
                                    const ScoringConfig& cfg, std::uint64_t seed);

[[nodiscard]] FittedModel fit_model(const MarkedEventSeries& train, const ModelSpec& spec, const ScoringConfig& cfg,
                                    std::uint64_t seed);

struct ScoreReport {
    ModelSpec spec;
    LogScore time;
    LogScore mark;
    double combined{0.0};
    double combined_se{0.0};
    double delta{0.0};  // combined minus the Exp+iid combined score, when present
    std::size_t train_events{0};
    std::size_t test_events{0};
    double scale_factor{1.0};
};

[[nodiscard]] ScoreReport score_fitted(const FittedModel& model, const MarkedEventSeries& train,
                                       const MarkedEventSeries& test, const ScoringConfig& cfg, std::uint64_t seed);

/// Sets `delta` relative to the Exp+iid entry (left at 0 when it is absent).
void apply_baseline_deltas(std::span<ScoreReport> reports);

/// Fits and scores every model; one Hawkes chain per kernel is shared across mark models.
[[nodiscard]] std::vector<ScoreReport> score_models(const MarkedEventSeries& train, const MarkedEventSeries& test,
                                                    std::span<const ModelSpec> grid, const ScoringConfig& cfg,
                                                    std::uint64_t seed);

/// Forward paths from the representative draws of a fitted model, `paths_per_draw` per
/// (draw, mark state) pair cycled over the retained mark states.
[[nodiscard]] std::vector<PredictivePath> simulate_predictive(const FittedModel& model,
                                                              const MarkedEventSeries& train, double horizon,
                                                              std::size_t paths, std::uint64_t seed);

}  // namespace hpot
