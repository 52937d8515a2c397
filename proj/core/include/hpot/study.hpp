#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hpot/evt.hpp"
#include "hpot/hawkes.hpp"
#include "hpot/predict.hpp"

namespace hpot {

enum class KernelTruth { exponential, mixture };
enum class MarkTruth { iid, hierarchical };

/// 0.7 LN(-0.3, 0.35^2) + 0.3 LN(1.2, 0.45^2).
[[nodiscard]] LognormalMixture reference_mixture();

struct ScenarioSpec {
    KernelTruth kernel{KernelTruth::exponential};
    MarkTruth marks{MarkTruth::iid};
    double mu{0.10};
    double kappa{0.55};
    double beta{1.0};
    double T{1000.0};
    double train_end{800.0};
    double sigma0{1.0};
    double xi{0.15};
    double tau_sigma{1.0};  // used by hierarchical marks only
    std::size_t replicates{10};
    std::uint64_t seed{1};

    [[nodiscard]] std::string name() const;  // "Exponential kernel, iid marks", ...
    [[nodiscard]] HawkesParams hawkes() const;
    void validate() const;
};

/// The 2x2 truth grid built from a base specification.
[[nodiscard]] std::vector<ScenarioSpec> scenario_grid(const ScenarioSpec& base);

struct TruthRecord {
    HawkesParams hawkes;
    BranchingStructure branching;
    ClusterPartition partition;
    std::vector<double> times;
    std::vector<double> marks;
    std::vector<double> z;  // one per true cluster; zeros for iid marks
    double sigma0{1.0};
    double tau_sigma{0.0};
    double xi{0.0};
    std::size_t regenerations{0};
    std::uint64_t seed{0};  // stream that produced the accepted replicate
};

struct ScenarioData {
    MarkedEventSeries train;
    MarkedEventSeries test;
    TruthRecord truth;
};

/// Simulates events with their true branching on (0, T], attaches marks (threshold 0,
/// scale factor 1) and splits at train_end. A replicate without test events is redrawn
/// from the next sub-seed and the redraw count is recorded.
[[nodiscard]] ScenarioData generate_scenario(const ScenarioSpec& spec, std::size_t replicate);

/// Mark log-likelihood under the truth, recomputed from the record alone.
[[nodiscard]] double truth_mark_loglik(const TruthRecord& truth);

struct ReplicateResult {
    std::size_t replicate{0};
    bool completed{false};
    std::string error;
    std::size_t regenerations{0};
    std::size_t train_events{0};
    std::size_t test_events{0};
    std::vector<ScoreReport> reports;
};

struct CellSummary {
    ModelSpec model;
    double mean_delta{0.0};
    double se_delta{0.0};
    std::size_t completed{0};
};

struct ScenarioResult {
    ScenarioSpec spec;
    std::vector<ReplicateResult> replicates;
    std::vector<CellSummary> cells;  // model_grid() order
};

struct StudyResult {
    std::vector<ScenarioResult> scenarios;
};

[[nodiscard]] std::vector<CellSummary> summarise_cells(std::span<const ReplicateResult> replicates);

/// Fits all four models on every replicate of every scenario and scores them on the test
/// window. Failed replicates are recorded and excluded from the cell statistics.
[[nodiscard]] StudyResult run_study(std::span<const ScenarioSpec> scenarios, const ScoringConfig& cfg);

/// One row per replicate and model.
void write_study_csv(std::ostream& out, const StudyResult& result);
/// One row per scenario with mean delta and its standard error for each model.
void write_study_summary(std::ostream& out, const StudyResult& result);

}  // namespace hpot
