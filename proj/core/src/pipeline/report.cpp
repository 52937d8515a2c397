#include "hpot/pipeline/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <json.hpp>

#include "hpot/numeric.hpp"

namespace hpot::pipeline {

namespace {

ParameterInterval summarise(const std::string& name, std::vector<double> v) {
    ParameterInterval p;
    p.parameter = name;
    p.draws = v.size();
    if (v.empty()) {
        p.median = p.lower = p.upper = std::numeric_limits<double>::quiet_NaN();
        return p;
    }
    std::sort(v.begin(), v.end());
    p.median = quantile_sorted(v, 0.5);
    p.lower = quantile_sorted(v, 0.025);
    p.upper = quantile_sorted(v, 0.975);
    return p;
}

nlohmann::json score_to_json(const LogScore& s) {
    return {{"value", s.value}, {"standard_error", s.standard_error}, {"draws", s.draws}};
}

}  // namespace

void write_kernel_density_csv(std::ostream& out, const std::vector<PosteriorDraw>& draws, double max_lag,
                              std::size_t points, std::size_t max_draws) {
    out << "lag,mean,median,lower,upper\n" << std::setprecision(10);
    const auto picks = evenly_spaced_indices(draws.size(), max_draws);
    std::vector<CompiledKernel> kernels;
    kernels.reserve(picks.size());
    for (std::size_t i : picks) kernels.emplace_back(draws[i].hawkes.kernel);
    std::vector<double> values(kernels.size());
    for (std::size_t g = 1; g <= points; ++g) {
        const double x = max_lag * static_cast<double>(g) / static_cast<double>(points);
        for (std::size_t k = 0; k < kernels.size(); ++k) values[k] = kernels[k].density(x);
        if (values.empty()) continue;
        const double m = mean(values);
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        out << x << ',' << m << ',' << quantile_sorted(sorted, 0.5) << ',' << quantile_sorted(sorted, 0.025) << ','
            << quantile_sorted(sorted, 0.975) << '\n';
    }
}

void write_clusters_csv(std::ostream& out, const FittedModel& model, std::span<const double> times) {
    out << "representative,draw_index,event,time,cluster,background\n" << std::setprecision(12);
    for (std::size_t r = 0; r < model.marks.entries.size(); ++r) {
        const auto& e = model.marks.entries[r];
        const auto& parents = model.hawkes.draws[e.draw_index].branching.parents;
        for (std::size_t i = 0; i < e.partition.assignment.size() && i < times.size(); ++i) {
            out << r << ',' << e.draw_index << ',' << i << ',' << times[i] << ',' << e.partition.assignment[i] << ','
                << (parents[i] == kBackground ? 1 : 0) << '\n';
        }
    }
}

std::vector<ParameterInterval> parameter_intervals(const FittedModel& model) {
    std::vector<double> mu;
    std::vector<double> kappa;
    std::vector<double> beta;
    std::vector<double> alpha;
    for (const auto& d : model.hawkes.draws) {
        mu.push_back(d.hawkes.mu);
        kappa.push_back(d.hawkes.kappa);
        if (const auto* e = std::get_if<ExponentialKernel>(&d.hawkes.kernel)) {
            beta.push_back(e->rate);
        } else {
            alpha.push_back(d.alpha_dp);
        }
    }
    std::vector<double> xi;
    std::vector<double> tau;
    std::vector<double> sigma0;
    for (const auto& e : model.marks.entries) {
        for (const auto& s : e.states) {
            xi.push_back(s.xi);
            tau.push_back(s.tau_sigma);
            sigma0.push_back(std::exp(s.log_sigma0));
        }
    }
    std::vector<ParameterInterval> rows;
    rows.push_back(summarise("mu", std::move(mu)));
    rows.push_back(summarise("kappa", std::move(kappa)));
    if (model.spec.kernel == KernelModel::exponential) {
        rows.push_back(summarise("beta", std::move(beta)));
    } else {
        rows.push_back(summarise("alpha_dp", std::move(alpha)));
    }
    rows.push_back(summarise("sigma0", std::move(sigma0)));
    rows.push_back(summarise("xi", std::move(xi)));
    if (model.spec.marks == MarkModel::hierarchical) {
        rows.push_back(summarise("tau_sigma", std::move(tau)));
    }
    return rows;
}

void write_parameter_intervals_csv(std::ostream& out, const std::string& model_name,
                                   std::span<const ParameterInterval> rows) {
    out << "model,parameter,median,lower_95,upper_95,draws\n" << std::setprecision(10);
    for (const auto& r : rows) {
        out << model_name << ',' << r.parameter << ',' << r.median << ',' << r.lower << ',' << r.upper << ','
            << r.draws << '\n';
    }
}

void write_scores_csv(std::ostream& out, std::span<const ScoreReport> reports) {
    out << "model,time_score,time_se,mark_score,mark_se,combined,combined_se,delta_vs_exp_iid,train_events,"
           "test_events,scale_factor\n"
        << std::setprecision(17);
    for (const auto& r : reports) {
        out << r.spec.name() << ',' << r.time.value << ',' << r.time.standard_error << ',' << r.mark.value << ','
            << r.mark.standard_error << ',' << r.combined << ',' << r.combined_se << ',' << r.delta << ','
            << r.train_events << ',' << r.test_events << ',' << r.scale_factor << '\n';
    }
}

std::string scores_json(std::span<const ScoreReport> reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        arr.push_back({{"model", r.spec.name()},
                       {"time_logscore", score_to_json(r.time)},
                       {"mark_logscore", score_to_json(r.mark)},
                       {"combined", r.combined},
                       {"combined_se", r.combined_se},
                       {"delta_vs_exp_iid", r.delta},
                       {"train_events", r.train_events},
                       {"test_events", r.test_events},
                       {"scale_factor", r.scale_factor},
                       {"mark_scale", "original (Jacobian-corrected)"}});
    }
    return arr.dump(2) + "\n";
}

void write_predictive_csv(std::ostream& out, const PredictiveSummary& s) {
    out << "quantity,level,value\n" << std::setprecision(10);
    out << "paths,," << s.paths << '\n';
    out << "nonempty_paths,," << s.nonempty_paths << '\n';
    out << "count_mean,," << s.count_mean << '\n';
    for (std::size_t k = 0; k < s.count_pmf.size(); ++k) {
        out << "count_pmf," << k << ',' << s.count_pmf[k] << '\n';
    }
    out << "max_median,," << s.max_median << '\n';
    out << "max_lower_5,," << s.max_lower << '\n';
    out << "max_upper_95,," << s.max_upper << '\n';
    for (std::size_t l = 0; l < s.levels.size(); ++l) {
        out << "prob_max_exceeds," << s.levels[l] << ',' << s.exceedance_prob[l] << '\n';
    }
}

std::string predictive_json(const PredictiveSummary& s, double horizon) {
    nlohmann::json j = {{"horizon", horizon},
                        {"paths", s.paths},
                        {"nonempty_paths", s.nonempty_paths},
                        {"count_mean", s.count_mean},
                        {"count_pmf", s.count_pmf},
                        {"levels", s.levels},
                        {"prob_max_exceeds", s.exceedance_prob},
                        {"empty_path_convention", kEmptyPathConvention}};
    if (s.nonempty_paths > 0) {
        j["max_median"] = s.max_median;
        j["max_interval_90"] = {s.max_lower, s.max_upper};
    }
    return j.dump(2) + "\n";
}

}  // namespace hpot::pipeline
