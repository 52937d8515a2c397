// hpot: threshold exceedances as a marked Hawkes process.
//
//   hpot simulate|fit|predict|score|study|report --config run.ini [--set section.key=value]... [--out DIR]

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hpot/errors.hpp"
#include "hpot/pipeline/config.hpp"
#include "hpot/pipeline/draw_store.hpp"
#include "hpot/pipeline/ingest.hpp"
#include "hpot/pipeline/report.hpp"
#include "hpot/study.hpp"

namespace fs = std::filesystem;
using namespace hpot;
using namespace hpot::pipeline;

namespace {

struct Options {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    std::string draws;
    bool grid{false};
};

class RunContext {
public:
    RunContext(const std::string& command, const Options& opt) : command_(command) {
        cfg = load_config(opt.config, opt.overrides);
        if (!opt.out.empty()) cfg.output_dir = opt.out;
        dir = cfg.output_dir;
        fs::create_directories(dir);
        write("resolved.ini", resolved_config(cfg));
        log("command", command);
        log("config_hash", config_hash(cfg));
        log("seed", std::to_string(cfg.seed));
        log("preset", cfg.preset);
    }

    ~RunContext() {
        log("status", ok ? "ok" : "failed");
        std::ofstream(dir / "run.log") << log_.str();
    }

    void write(const std::string& name, const std::string& text) const {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / name).string());
        out << text;
    }

    std::ofstream open(const std::string& name) const {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / name).string());
        return out;
    }

    void log(const std::string& key, const std::string& value) {
        log_ << key << '=' << value << '\n';
        std::clog << "[" << command_ << "] " << key << '=' << value << '\n';
    }

    RunConfig cfg;
    fs::path dir;
    bool ok{false};

private:
    std::string command_;
    std::ostringstream log_;
};

std::string data_metadata(const RunConfig& cfg, const SplitData& d) {
    nlohmann::json j = {{"input", cfg.data.input},
                        {"transform", to_string(cfg.data.transform)},
                        {"threshold", d.threshold.level},
                        {"threshold_negated", d.threshold.negated},
                        {"threshold_source", "training observations only"},
                        {"quantile_convention", kQuantileConvention},
                        {"scale_factor", d.train.scale_factor},
                        {"split_time", d.split_time},
                        {"train_window", {d.train.window_start, d.train.window_end}},
                        {"test_window", {d.test.window_start, d.test.window_end}},
                        {"train_events", d.train.size()},
                        {"test_events", d.test.size()}};
    return j.dump(2) + "\n";
}

SplitData load_data(RunContext& ctx) {
    SplitData d = prepare_data(ctx.cfg);
    ctx.write("data.json", data_metadata(ctx.cfg, d));
    ctx.log("train_events", std::to_string(d.train.size()));
    ctx.log("test_events", std::to_string(d.test.size()));
    return d;
}

DrawStoreMeta make_meta(const RunConfig& cfg, const SplitData& d, const FittedModel& m) {
    DrawStoreMeta meta;
    meta.config_hash = config_hash(cfg);
    meta.seed = cfg.seed;
    meta.model = m.spec;
    meta.threshold = d.threshold.level;
    meta.negated = d.threshold.negated;
    meta.scale_factor = d.train.scale_factor;
    meta.window_start = d.train.window_start;
    meta.window_end = d.train.window_end;
    meta.train_events = d.train.size();
    meta.kernel_acceptance = m.hawkes.kernel_acceptance;
    meta.representative = m.representative;
    return meta;
}

FittedModel load_fitted(RunContext& ctx, const Options& opt, const SplitData& d) {
    const fs::path path = opt.draws.empty() ? ctx.dir / "draws.ndjson" : fs::path(opt.draws);
    DrawStore store = read_draw_store(path.string());
    if (store.meta.config_hash != config_hash(ctx.cfg)) {
        throw DataError("draw store " + path.string() + " was written under a different configuration");
    }
    if (store.meta.train_events != d.train.size() || store.meta.scale_factor != d.train.scale_factor ||
        store.meta.threshold != d.threshold.level) {
        throw DataError("draw store " + path.string() + " does not match the prepared training data");
    }
    ctx.log("draw_store", path.string());
    return std::move(store.fitted);
}

int cmd_simulate(const Options& opt) {
    RunContext ctx("simulate", opt);
    ScenarioSpec spec = ctx.cfg.study.base;
    spec.seed = ctx.cfg.seed;
    const ScenarioData d = generate_scenario(spec, 0);
    {
        auto out = ctx.open("series.csv");
        out << "time,value\n" << std::setprecision(17);
        for (std::size_t i = 0; i < d.truth.times.size(); ++i) {
            out << d.truth.times[i] << ',' << d.truth.marks[i] << '\n';
        }
    }
    nlohmann::json truth = {{"scenario", spec.name()},
                            {"mu", spec.mu},
                            {"kappa", spec.kappa},
                            {"kernel", spec.kernel == KernelTruth::exponential ? "exponential" : "lognormal-mixture"},
                            {"beta", spec.beta},
                            {"sigma0", d.truth.sigma0},
                            {"xi", d.truth.xi},
                            {"tau_sigma", d.truth.tau_sigma},
                            {"T", spec.T},
                            {"train_end", spec.train_end},
                            {"z", d.truth.z},
                            {"parents", d.truth.branching.to_one_based()},
                            {"regenerations", d.truth.regenerations},
                            {"stream_seed", d.truth.seed}};
    ctx.write("truth.json", truth.dump(2) + "\n");

    // A ready-to-fit configuration for the simulated series.
    RunConfig fit_cfg = ctx.cfg;
    fit_cfg.data.input = (ctx.dir / "series.csv").string();
    fit_cfg.data.transform = Transform::identity;
    fit_cfg.data.threshold = ThresholdSpec::absolute(0.0);
    fit_cfg.data.scale = ScalePolicy{ScaleKind::explicit_value, 1.0};
    fit_cfg.data.split = SplitRule{SplitKind::time, spec.train_end, {}};
    fit_cfg.data.window_start = 0.0;
    fit_cfg.data.window_end = spec.T;
    ctx.write("fit.ini", resolved_config(fit_cfg));
    ctx.log("events", std::to_string(d.truth.times.size()));
    ctx.ok = true;
    return 0;
}

int cmd_fit(const Options& opt) {
    RunContext ctx("fit", opt);
    const SplitData d = load_data(ctx);
    ctx.log("model", ctx.cfg.model.name());
    const FittedModel m = fit_model(d.train, ctx.cfg.model, ctx.cfg.scoring, ctx.cfg.seed);
    write_draw_store((ctx.dir / "draws.ndjson").string(), make_meta(ctx.cfg, d, m), m);
    auto csv = ctx.open("draws.csv");
    write_draws_csv(csv, m.hawkes.draws);
    ctx.log("draws", std::to_string(m.hawkes.draws.size()));
    ctx.log("kernel_acceptance", std::to_string(m.hawkes.kernel_acceptance));
    ctx.ok = true;
    return 0;
}

int cmd_score(const Options& opt) {
    RunContext ctx("score", opt);
    const SplitData d = load_data(ctx);
    std::vector<ScoreReport> reports;
    if (opt.grid) {
        const auto grid = model_grid();
        reports = score_models(d.train, d.test, grid, ctx.cfg.scoring, ctx.cfg.seed);
    } else {
        const bool stored = !opt.draws.empty() || fs::exists(ctx.dir / "draws.ndjson");
        const FittedModel m = stored ? load_fitted(ctx, opt, d)
                                     : fit_model(d.train, ctx.cfg.model, ctx.cfg.scoring, ctx.cfg.seed);
        reports.push_back(score_fitted(m, d.train, d.test, ctx.cfg.scoring, ctx.cfg.seed));
        apply_baseline_deltas(reports);
    }
    ctx.write("scores.json", scores_json(reports));
    auto csv = ctx.open("scores.csv");
    write_scores_csv(csv, reports);
    for (const auto& r : reports) {
        std::cout << r.spec.name() << ": time " << r.time.value << ", mark " << r.mark.value << ", combined "
                  << r.combined << '\n';
    }
    ctx.ok = true;
    return 0;
}

int cmd_predict(const Options& opt) {
    RunContext ctx("predict", opt);
    const SplitData d = load_data(ctx);
    const bool stored = !opt.draws.empty() || fs::exists(ctx.dir / "draws.ndjson");
    const FittedModel m =
        stored ? load_fitted(ctx, opt, d) : fit_model(d.train, ctx.cfg.model, ctx.cfg.scoring, ctx.cfg.seed);
    const auto& pc = ctx.cfg.prediction;
    const auto paths = simulate_predictive(m, d.train, pc.horizon, pc.paths, derive_seed(ctx.cfg.seed, {0x9e3d}));
    const PredictiveSummary s = predictive_summaries(paths, pc.levels);
    ctx.write("predictive.json", predictive_json(s, pc.horizon));
    auto csv = ctx.open("predictive.csv");
    write_predictive_csv(csv, s);
    auto samples = ctx.open("predictive_paths.csv");
    samples << "path,time,excess,new_cluster\n" << std::setprecision(12);
    for (std::size_t p = 0; p < paths.size(); ++p) {
        for (std::size_t i = 0; i < paths[p].size(); ++i) {
            samples << p << ',' << paths[p].times[i] << ',' << paths[p].excesses[i] << ','
                    << (paths[p].clusters[i].is_new ? 1 : 0) << '\n';
        }
    }
    ctx.log("paths", std::to_string(paths.size()));
    ctx.ok = true;
    return 0;
}

int cmd_study(const Options& opt) {
    RunContext ctx("study", opt);
    ScenarioSpec base = ctx.cfg.study.base;
    base.seed = ctx.cfg.seed;
    const auto scenarios = scenario_grid(base);
    const StudyResult result = run_study(scenarios, ctx.cfg.scoring);
    auto rows = ctx.open("study_replicates.csv");
    write_study_csv(rows, result);
    std::ostringstream summary;
    write_study_summary(summary, result);
    ctx.write("study_summary.csv", summary.str());
    std::cout << summary.str();
    for (const auto& sc : result.scenarios) {
        for (const auto& r : sc.replicates) {
            if (!r.completed) ctx.log("failed_replicate", sc.spec.name() + " #" + std::to_string(r.replicate) + ": " + r.error);
        }
    }
    ctx.ok = true;
    return 0;
}

int cmd_report(const Options& opt) {
    RunContext ctx("report", opt);
    const SplitData d = load_data(ctx);
    const FittedModel m = load_fitted(ctx, opt, d);
    double max_lag = 1.0;
    if (d.train.size() > 1) {
        max_lag = std::max(1.0, (d.train.window_end - d.train.window_start) / 20.0);
    }
    auto density = ctx.open("kernel_density.csv");
    write_kernel_density_csv(density, m.hawkes.draws, max_lag, 200);
    auto clusters = ctx.open("clusters.csv");
    write_clusters_csv(clusters, m, d.train.times);
    auto intervals = ctx.open("parameter_intervals.csv");
    const auto rows = parameter_intervals(m);
    write_parameter_intervals_csv(intervals, m.spec.name(), rows);
    auto trace = ctx.open("trace.csv");
    write_draws_csv(trace, m.hawkes.draws);
    ctx.ok = true;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marked Hawkes models for threshold exceedances"};
    app.require_subcommand(1);
    Options opt;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", opt.config, "INI configuration file");
        sub->add_option("-s,--set", opt.overrides, "Override a setting: section.key=value");
        sub->add_option("-o,--out", opt.out, "Output directory (overrides output.directory)");
    };
    auto* simulate = app.add_subcommand("simulate", "Simulate one scenario series with its truth record");
    auto* fit = app.add_subcommand("fit", "Fit the configured model and write the draw store");
    auto* predict = app.add_subcommand("predict", "Forward predictive summaries");
    auto* score = app.add_subcommand("score", "Held-out predictive scores");
    auto* study = app.add_subcommand("study", "Run the 2x2 simulation study");
    auto* report = app.add_subcommand("report", "Plot-ready CSVs from a draw store");
    for (auto* sub : {simulate, fit, predict, score, study, report}) add_common(sub);
    for (auto* sub : {predict, score, report}) {
        sub->add_option("-d,--draws", opt.draws, "Draw store (default: <out>/draws.ndjson)");
    }
    score->add_flag("--grid", opt.grid, "Fit and score all four model variants");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*simulate) return cmd_simulate(opt);
        if (*fit) return cmd_fit(opt);
        if (*predict) return cmd_predict(opt);
        if (*score) return cmd_score(opt);
        if (*study) return cmd_study(opt);
        if (*report) return cmd_report(opt);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
