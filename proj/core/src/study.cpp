#include "hpot/study.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "hpot/errors.hpp"
#include "hpot/numeric.hpp"
#include "hpot/parallel.hpp"

namespace hpot {

namespace {

constexpr std::size_t kMaxRegenerations = 1000;
constexpr std::uint64_t kStudyFitStream = 0x5717;

}  // namespace

LognormalMixture reference_mixture() {
    LognormalMixture m;
    m.weights = {0.7, 0.3};
    m.locations = {-0.3, 1.2};
    m.scales = {0.35, 0.45};
    return m;
}

std::string ScenarioSpec::name() const {
    return std::string(kernel == KernelTruth::exponential ? "Exponential kernel" : "Mixture kernel") + ", " +
           (marks == MarkTruth::iid ? "iid marks" : "hier. marks");
}

HawkesParams ScenarioSpec::hawkes() const {
    HawkesParams p;
    p.mu = mu;
    p.kappa = kappa;
    if (kernel == KernelTruth::exponential) {
        p.kernel = ExponentialKernel{beta};
    } else {
        p.kernel = reference_mixture();
    }
    return p;
}

void ScenarioSpec::validate() const {
    hawkes().validate();
    if (!(T > 0.0) || !(train_end > 0.0) || !(train_end < T)) {
        throw std::invalid_argument("scenario needs 0 < train_end < T");
    }
    if (!(sigma0 > 0.0) || !(tau_sigma >= 0.0) || !std::isfinite(xi)) {
        throw std::invalid_argument("scenario mark parameters out of range");
    }
}

std::vector<ScenarioSpec> scenario_grid(const ScenarioSpec& base) {
    std::vector<ScenarioSpec> out;
    for (KernelTruth k : {KernelTruth::exponential, KernelTruth::mixture}) {
        for (MarkTruth m : {MarkTruth::iid, MarkTruth::hierarchical}) {
            ScenarioSpec s = base;
            s.kernel = k;
            s.marks = m;
            s.seed = derive_seed(base.seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(m)});
            out.push_back(s);
        }
    }
    return out;
}

ScenarioData generate_scenario(const ScenarioSpec& spec, std::size_t replicate) {
    spec.validate();
    const HawkesParams p = spec.hawkes();
    for (std::size_t attempt = 0; attempt < kMaxRegenerations; ++attempt) {
        const std::uint64_t stream = derive_seed(spec.seed, {replicate, attempt});
        Rng rng(stream);
        SimulatedSeries sim = simulate(p, spec.T, rng);
        const std::size_t n = sim.times.size();
        std::size_t n_train = 0;
        while (n_train < n && sim.times[n_train] <= spec.train_end) ++n_train;
        if (n_train == n || n_train == 0) {
            continue;
        }
        ScenarioData d;
        TruthRecord& t = d.truth;
        t.hawkes = p;
        t.branching = std::move(sim.branching);
        t.times = std::move(sim.times);
        t.partition = clusters_from_branching(t.branching, t.times, spec.T);
        t.sigma0 = spec.sigma0;
        t.xi = spec.xi;
        t.tau_sigma = spec.marks == MarkTruth::hierarchical ? spec.tau_sigma : 0.0;
        t.z.assign(t.partition.cluster_count(), 0.0);
        if (spec.marks == MarkTruth::hierarchical) {
            for (double& z : t.z) z = rng.normal();
        }
        t.marks.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double sigma = std::exp(std::log(t.sigma0) + t.tau_sigma * t.z[t.partition.assignment[i]]);
            t.marks[i] = gpd_sample({sigma, t.xi}, rng);
        }
        t.regenerations = attempt;
        t.seed = stream;

        d.train.window_start = 0.0;
        d.train.window_end = spec.train_end;
        d.test.window_start = spec.train_end;
        d.test.window_end = spec.T;
        d.train.times.assign(t.times.begin(), t.times.begin() + static_cast<std::ptrdiff_t>(n_train));
        d.train.excesses.assign(t.marks.begin(), t.marks.begin() + static_cast<std::ptrdiff_t>(n_train));
        d.test.times.assign(t.times.begin() + static_cast<std::ptrdiff_t>(n_train), t.times.end());
        d.test.excesses.assign(t.marks.begin() + static_cast<std::ptrdiff_t>(n_train), t.marks.end());
        return d;
    }
    throw NumericalError("scenario produced no usable replicate after repeated regeneration");
}

double truth_mark_loglik(const TruthRecord& truth) {
    double total = 0.0;
    for (std::size_t i = 0; i < truth.marks.size(); ++i) {
        const double sigma =
            std::exp(std::log(truth.sigma0) + truth.tau_sigma * truth.z[truth.partition.assignment[i]]);
        total += gpd_logpdf(truth.marks[i], {sigma, truth.xi});
    }
    return total;
}

std::vector<CellSummary> summarise_cells(std::span<const ReplicateResult> replicates) {
    std::vector<CellSummary> cells;
    for (const ModelSpec& m : model_grid()) {
        CellSummary c;
        c.model = m;
        std::vector<double> deltas;
        for (const auto& r : replicates) {
            if (!r.completed) continue;
            for (const auto& s : r.reports) {
                if (s.spec == m) deltas.push_back(s.delta);
            }
        }
        c.completed = deltas.size();
        if (!deltas.empty()) {
            c.mean_delta = mean(deltas);
            c.se_delta = deltas.size() > 1 ? std::sqrt(sample_variance(deltas) / static_cast<double>(deltas.size()))
                                           : std::numeric_limits<double>::quiet_NaN();
        }
        cells.push_back(c);
    }
    return cells;
}

StudyResult run_study(std::span<const ScenarioSpec> scenarios, const ScoringConfig& cfg) {
    cfg.validate();
    StudyResult result;
    result.scenarios.resize(scenarios.size());
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        scenarios[s].validate();
        result.scenarios[s].spec = scenarios[s];
        result.scenarios[s].replicates.resize(scenarios[s].replicates);
        for (std::size_t r = 0; r < scenarios[s].replicates; ++r) tasks.emplace_back(s, r);
    }
    ScoringConfig inner = cfg;
    inner.threads = 1;
    const auto grid = model_grid();
    parallel_for(tasks.size(), cfg.threads, [&](std::size_t t) {
        const auto [s, r] = tasks[t];
        const ScenarioSpec& spec = scenarios[s];
        ReplicateResult& out = result.scenarios[s].replicates[r];
        out.replicate = r;
        try {
            const ScenarioData data = generate_scenario(spec, r);
            out.regenerations = data.truth.regenerations;
            out.train_events = data.train.size();
            out.test_events = data.test.size();
            out.reports = score_models(data.train, data.test, grid, inner, derive_seed(spec.seed, {kStudyFitStream, r}));
            out.completed = true;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    });
    for (auto& sc : result.scenarios) {
        sc.cells = summarise_cells(sc.replicates);
    }
    return result;
}

void write_study_csv(std::ostream& out, const StudyResult& result) {
    out << "scenario,replicate,model,train_events,test_events,regenerations,time_score,mark_score,combined,delta,"
           "status\n";
    out << std::setprecision(10);
    for (const auto& sc : result.scenarios) {
        for (const auto& r : sc.replicates) {
            if (!r.completed) {
                out << '"' << sc.spec.name() << "\"," << r.replicate << ",,,,," << r.regenerations << ",,,,,\"failed: "
                    << r.error << "\"\n";
                continue;
            }
            for (const auto& s : r.reports) {
                out << '"' << sc.spec.name() << "\"," << r.replicate << ',' << s.spec.name() << ',' << r.train_events
                    << ',' << r.test_events << ',' << r.regenerations << ',' << s.time.value << ',' << s.mark.value
                    << ',' << s.combined << ',' << s.delta << ",ok\n";
            }
        }
    }
}

void write_study_summary(std::ostream& out, const StudyResult& result) {
    out << "scenario,completed";
    for (const auto& m : model_grid()) {
        out << ',' << m.name() << "_mean," << m.name() << "_se";
    }
    out << '\n' << std::fixed << std::setprecision(3);
    for (const auto& sc : result.scenarios) {
        std::size_t completed = 0;
        for (const auto& r : sc.replicates) completed += r.completed ? 1 : 0;
        out << '"' << sc.spec.name() << "\"," << completed;
        for (const auto& c : sc.cells) {
            out << ',' << c.mean_delta << ',' << c.se_delta;
        }
        out << '\n';
    }
    out << std::defaultfloat;
}

}  // namespace hpot
