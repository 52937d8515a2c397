#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hpot/predict.hpp"

namespace hpot::pipeline {

/// Posterior kernel density h(x) on `points` lags evenly spaced in (0, max_lag]:
/// pointwise mean, median and central 95% band over up to `max_draws` draws.
void write_kernel_density_csv(std::ostream& out, const std::vector<PosteriorDraw>& draws, double max_lag,
                              std::size_t points, std::size_t max_draws = 500);

/// Cluster membership of every training event under each representative draw.
void write_clusters_csv(std::ostream& out, const FittedModel& model, std::span<const double> times);

struct ParameterInterval {
    std::string parameter;
    double median{0.0};
    double lower{0.0};  // 2.5%
    double upper{0.0};  // 97.5%
    std::size_t draws{0};
};

/// Posterior medians and 95% intervals of the Hawkes and mark parameters.
[[nodiscard]] std::vector<ParameterInterval> parameter_intervals(const FittedModel& model);
void write_parameter_intervals_csv(std::ostream& out, const std::string& model_name,
                                   std::span<const ParameterInterval> rows);

void write_scores_csv(std::ostream& out, std::span<const ScoreReport> reports);
[[nodiscard]] std::string scores_json(std::span<const ScoreReport> reports);

void write_predictive_csv(std::ostream& out, const PredictiveSummary& s);
[[nodiscard]] std::string predictive_json(const PredictiveSummary& s, double horizon);

}  // namespace hpot::pipeline
