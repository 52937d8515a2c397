#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hpot/evt.hpp"
#include "hpot/predict.hpp"
#include "hpot/study.hpp"

namespace hpot::pipeline {

enum class Transform { identity, negative_log_return, daily_aggregate_sum };
enum class SplitKind { fraction, date, trailing_years, time };

struct SplitRule {
    SplitKind kind{SplitKind::fraction};
    double value{0.8};
    std::string date;  // ISO date for SplitKind::date
};

struct DataConfig {
    std::string input;
    std::string time_column{"time"};
    std::string value_column{"value"};
    Transform transform{Transform::identity};
    ThresholdSpec threshold{ThresholdSpec::upper(95.0)};
    ScalePolicy scale;
    SplitRule split;
    std::optional<double> window_start;
    std::optional<double> window_end;
};

struct PredictionConfig {
    double horizon{365.0};
    std::size_t paths{1000};
    std::vector<double> levels{1.0, 2.0, 5.0};
};

struct StudyConfig {
    ScenarioSpec base;  // kernel/marks pick the scenario used by `simulate`
};

struct RunConfig {
    std::string preset{"paper"};
    DataConfig data;
    ModelSpec model{KernelModel::dirichlet_process, MarkModel::hierarchical};
    ScoringConfig scoring;
    std::uint64_t seed{1};
    PredictionConfig prediction;
    StudyConfig study;
    std::string output_dir{"hpot-out"};
};

/// Applies the chain and study settings of a named preset ("paper" or "desk").
void apply_preset(RunConfig& cfg, const std::string& preset);

/// Parses INI text. Unknown sections or keys and malformed values throw UsageError.
/// Overrides are "section.key=value" strings applied after the file contents.
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
[[nodiscard]] RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Every setting in canonical order; parse_config(resolved_config(c)) reproduces c.
[[nodiscard]] std::string resolved_config(const RunConfig& cfg);

/// FNV-1a of the data, model, priors and chain settings, as 16 hex digits.
[[nodiscard]] std::string config_hash(const RunConfig& cfg);

[[nodiscard]] std::string to_string(Transform t);
[[nodiscard]] std::string to_string(SplitKind k);

}  // namespace hpot::pipeline
