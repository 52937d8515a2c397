#include "hpot/pipeline/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "hpot/errors.hpp"

namespace hpot::pipeline {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
    std::string section;
    std::string key;
    Setter set;
    Getter get;
};

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw UsageError("expected a number, got '" + s + "'");
    }
    return v;
}

std::uint64_t parse_uint(const std::string& s) {
    std::uint64_t v = 0;
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw UsageError("expected a nonnegative integer, got '" + s + "'");
    }
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw UsageError("expected true or false, got '" + s + "'");
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(parse_double(item.substr(b, e - b + 1)));
    }
    return out;
}

std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

Field dbl(const std::string& section, const std::string& key, std::function<double&(RunConfig&)> ref) {
    return {section, key, [ref](RunConfig& c, const std::string& v) { ref(c) = parse_double(v); },
            [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); }};
}

Field size(const std::string& section, const std::string& key, std::function<std::size_t&(RunConfig&)> ref) {
    return {section, key, [ref](RunConfig& c, const std::string& v) { ref(c) = static_cast<std::size_t>(parse_uint(v)); },
            [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

template <typename E>
Field choice(const std::string& section, const std::string& key, std::function<E&(RunConfig&)> ref,
             std::vector<std::pair<std::string, E>> options) {
    return {section, key,
            [ref, options](RunConfig& c, const std::string& v) {
                for (const auto& [name, value] : options) {
                    if (name == v) {
                        ref(c) = value;
                        return;
                    }
                }
                std::string allowed;
                for (const auto& o : options) allowed += (allowed.empty() ? "" : ", ") + o.first;
                throw UsageError("unsupported value '" + v + "' (allowed: " + allowed + ")");
            },
            [ref, options](const RunConfig& c) {
                const E value = ref(const_cast<RunConfig&>(c));
                for (const auto& [name, e] : options) {
                    if (e == value) return name;
                }
                return std::string{};
            }};
}

Field optional_dbl(const std::string& section, const std::string& key,
                   std::function<std::optional<double>&(RunConfig&)> ref) {
    return {section, key,
            [ref](RunConfig& c, const std::string& v) {
                ref(c) = v.empty() || v == "auto" ? std::nullopt : std::optional<double>(parse_double(v));
            },
            [ref](const RunConfig& c) {
                const auto& v = ref(const_cast<RunConfig&>(c));
                return v ? format_double(*v) : std::string("auto");
            }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        // [data]
        f.push_back({"data", "input", [](RunConfig& c, const std::string& v) { c.data.input = v; },
                     [](const RunConfig& c) { return c.data.input; }});
        f.push_back({"data", "time_column", [](RunConfig& c, const std::string& v) { c.data.time_column = v; },
                     [](const RunConfig& c) { return c.data.time_column; }});
        f.push_back({"data", "value_column", [](RunConfig& c, const std::string& v) { c.data.value_column = v; },
                     [](const RunConfig& c) { return c.data.value_column; }});
        f.push_back(choice<Transform>("data", "transform", [](RunConfig& c) -> Transform& { return c.data.transform; },
                                      {{"identity", Transform::identity},
                                       {"negative-log-return", Transform::negative_log_return},
                                       {"daily-aggregate-sum", Transform::daily_aggregate_sum}}));
        f.push_back(choice<ThresholdKind>("data", "threshold",
                                          [](RunConfig& c) -> ThresholdKind& { return c.data.threshold.kind; },
                                          {{"upper", ThresholdKind::upper_percentile},
                                           {"lower", ThresholdKind::lower_percentile},
                                           {"absolute", ThresholdKind::absolute}}));
        f.push_back(dbl("data", "threshold_level", [](RunConfig& c) -> double& { return c.data.threshold.value; }));
        f.push_back({"data", "threshold_negate",
                     [](RunConfig& c, const std::string& v) { c.data.threshold.negate = parse_bool(v); },
                     [](const RunConfig& c) { return std::string(c.data.threshold.negate ? "true" : "false"); }});
        f.push_back(choice<ScaleKind>("data", "scale", [](RunConfig& c) -> ScaleKind& { return c.data.scale.kind; },
                                      {{"median", ScaleKind::median_excess},
                                       {"mean", ScaleKind::mean_excess},
                                       {"explicit", ScaleKind::explicit_value}}));
        f.push_back(dbl("data", "scale_value", [](RunConfig& c) -> double& { return c.data.scale.value; }));
        f.push_back(choice<SplitKind>("data", "split", [](RunConfig& c) -> SplitKind& { return c.data.split.kind; },
                                      {{"fraction", SplitKind::fraction},
                                       {"date", SplitKind::date},
                                       {"trailing-years", SplitKind::trailing_years},
                                       {"time", SplitKind::time}}));
        f.push_back({"data", "split_value",
                     [](RunConfig& c, const std::string& v) {
                         if (c.data.split.kind == SplitKind::date) {
                             c.data.split.date = v;
                         } else {
                             c.data.split.value = parse_double(v);
                         }
                     },
                     [](const RunConfig& c) {
                         return c.data.split.kind == SplitKind::date ? c.data.split.date
                                                                     : format_double(c.data.split.value);
                     }});
        f.push_back(optional_dbl("data", "window_start",
                                 [](RunConfig& c) -> std::optional<double>& { return c.data.window_start; }));
        f.push_back(optional_dbl("data", "window_end",
                                 [](RunConfig& c) -> std::optional<double>& { return c.data.window_end; }));
        // [model]
        f.push_back({"model", "model", [](RunConfig& c, const std::string& v) { c.model = parse_model(v); },
                     [](const RunConfig& c) { return c.model.name(); }});
        // [priors]
        f.push_back(dbl("priors", "mu_shape", [](RunConfig& c) -> double& { return c.scoring.priors.mu_shape; }));
        f.push_back(dbl("priors", "mu_rate", [](RunConfig& c) -> double& { return c.scoring.priors.mu_rate; }));
        f.push_back(dbl("priors", "kappa_shape", [](RunConfig& c) -> double& { return c.scoring.priors.kappa_shape; }));
        f.push_back(dbl("priors", "kappa_rate", [](RunConfig& c) -> double& { return c.scoring.priors.kappa_rate; }));
        f.push_back(dbl("priors", "beta_upper", [](RunConfig& c) -> double& { return c.scoring.priors.beta_upper; }));
        f.push_back(dbl("priors", "dp_alpha_shape",
                        [](RunConfig& c) -> double& { return c.scoring.priors.dp.alpha_shape; }));
        f.push_back(dbl("priors", "dp_alpha_rate",
                        [](RunConfig& c) -> double& { return c.scoring.priors.dp.alpha_rate; }));
        f.push_back(dbl("priors", "dp_mu0", [](RunConfig& c) -> double& { return c.scoring.priors.dp.mu0; }));
        f.push_back(dbl("priors", "dp_k0", [](RunConfig& c) -> double& { return c.scoring.priors.dp.k0; }));
        f.push_back(dbl("priors", "dp_a0", [](RunConfig& c) -> double& { return c.scoring.priors.dp.a0; }));
        f.push_back(dbl("priors", "dp_b0", [](RunConfig& c) -> double& { return c.scoring.priors.dp.b0; }));
        f.push_back(size("priors", "dp_truncation",
                         [](RunConfig& c) -> std::size_t& { return c.scoring.priors.dp.truncation; }));
        f.push_back(dbl("priors", "log_sigma0_mean",
                        [](RunConfig& c) -> double& { return c.scoring.priors.gpd.log_sigma0_mean; }));
        f.push_back(dbl("priors", "log_sigma0_sd",
                        [](RunConfig& c) -> double& { return c.scoring.priors.gpd.log_sigma0_sd; }));
        f.push_back(dbl("priors", "tau_sd", [](RunConfig& c) -> double& { return c.scoring.priors.gpd.tau_sd; }));
        f.push_back(dbl("priors", "xi_sd", [](RunConfig& c) -> double& { return c.scoring.priors.gpd.xi_sd; }));
        f.push_back(dbl("priors", "xi_lower", [](RunConfig& c) -> double& { return c.scoring.priors.gpd.xi_lower; }));
        // [chains]
        f.push_back({"chains", "preset", [](RunConfig& c, const std::string& v) { c.preset = v; },
                     [](const RunConfig& c) { return c.preset; }});
        f.push_back({"chains", "seed", [](RunConfig& c, const std::string& v) { c.seed = parse_uint(v); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }});
        f.push_back(size("chains", "iterations", [](RunConfig& c) -> std::size_t& { return c.scoring.chain.iterations; }));
        f.push_back(size("chains", "burn_in", [](RunConfig& c) -> std::size_t& { return c.scoring.chain.burn_in; }));
        f.push_back(size("chains", "chains", [](RunConfig& c) -> std::size_t& { return c.scoring.chain.chains; }));
        f.push_back(size("chains", "thin", [](RunConfig& c) -> std::size_t& { return c.scoring.chain.thin; }));
        f.push_back(size("chains", "threads", [](RunConfig& c) -> std::size_t& { return c.scoring.threads; }));
        f.push_back(size("chains", "representative_draws",
                         [](RunConfig& c) -> std::size_t& { return c.scoring.representative_draws; }));
        f.push_back(size("chains", "score_draws", [](RunConfig& c) -> std::size_t& { return c.scoring.score_draws; }));
        f.push_back(size("chains", "mark_iterations",
                         [](RunConfig& c) -> std::size_t& { return c.scoring.mark_chain.iterations; }));
        f.push_back(size("chains", "mark_warmup",
                         [](RunConfig& c) -> std::size_t& { return c.scoring.mark_chain.warmup; }));
        f.push_back(size("chains", "mark_chains",
                         [](RunConfig& c) -> std::size_t& { return c.scoring.mark_chain.chains; }));
        f.push_back(size("chains", "mark_keep", [](RunConfig& c) -> std::size_t& { return c.scoring.mark_chain.keep; }));
        f.push_back(size("chains", "z_draws", [](RunConfig& c) -> std::size_t& { return c.scoring.z_draws; }));
        // [prediction]
        f.push_back(dbl("prediction", "horizon", [](RunConfig& c) -> double& { return c.prediction.horizon; }));
        f.push_back(size("prediction", "paths", [](RunConfig& c) -> std::size_t& { return c.prediction.paths; }));
        f.push_back({"prediction", "levels",
                     [](RunConfig& c, const std::string& v) { c.prediction.levels = parse_list(v); },
                     [](const RunConfig& c) { return format_list(c.prediction.levels); }});
        // [study]
        f.push_back(size("study", "replicates", [](RunConfig& c) -> std::size_t& { return c.study.base.replicates; }));
        f.push_back(choice<KernelTruth>("study", "kernel",
                                        [](RunConfig& c) -> KernelTruth& { return c.study.base.kernel; },
                                        {{"exponential", KernelTruth::exponential}, {"mixture", KernelTruth::mixture}}));
        f.push_back(choice<MarkTruth>("study", "marks", [](RunConfig& c) -> MarkTruth& { return c.study.base.marks; },
                                      {{"iid", MarkTruth::iid}, {"hierarchical", MarkTruth::hierarchical}}));
        f.push_back(dbl("study", "mu", [](RunConfig& c) -> double& { return c.study.base.mu; }));
        f.push_back(dbl("study", "kappa", [](RunConfig& c) -> double& { return c.study.base.kappa; }));
        f.push_back(dbl("study", "beta", [](RunConfig& c) -> double& { return c.study.base.beta; }));
        f.push_back(dbl("study", "T", [](RunConfig& c) -> double& { return c.study.base.T; }));
        f.push_back(dbl("study", "train_end", [](RunConfig& c) -> double& { return c.study.base.train_end; }));
        f.push_back(dbl("study", "sigma0", [](RunConfig& c) -> double& { return c.study.base.sigma0; }));
        f.push_back(dbl("study", "xi", [](RunConfig& c) -> double& { return c.study.base.xi; }));
        f.push_back(dbl("study", "tau_sigma", [](RunConfig& c) -> double& { return c.study.base.tau_sigma; }));
        // [output]
        f.push_back({"output", "directory", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
                     [](const RunConfig& c) { return c.output_dir; }});
        return f;
    }();
    return table;
}

const Field& find_field(const std::string& section, const std::string& key) {
    for (const auto& f : fields()) {
        if (f.section == section && f.key == key) return f;
    }
    throw UsageError("unknown config key '" + section + "." + key + "'");
}

void validate(const RunConfig& c) {
    try {
        c.scoring.validate();
        c.study.base.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid configuration: ") + e.what());
    }
    if (c.data.split.kind == SplitKind::fraction && !(c.data.split.value > 0.0 && c.data.split.value < 1.0)) {
        throw UsageError("split fraction must lie in (0, 1)");
    }
    if (c.data.threshold.kind != ThresholdKind::absolute &&
        !(c.data.threshold.value > 0.0 && c.data.threshold.value < 100.0)) {
        throw UsageError("threshold percentile must lie in (0, 100)");
    }
    if (!(c.prediction.horizon >= 0.0)) {
        throw UsageError("prediction horizon must be nonnegative");
    }
}

}  // namespace

void apply_preset(RunConfig& cfg, const std::string& preset) {
    auto& s = cfg.scoring;
    if (preset == "paper") {
        s.chain.iterations = 10000;
        s.chain.burn_in = 2000;
        s.chain.chains = 4;
        s.representative_draws = 100;
        s.score_draws = 1000;
        s.mark_chain.iterations = 2000;
        s.mark_chain.warmup = 1000;
        s.mark_chain.chains = 4;
        s.mark_chain.keep = 100;
        cfg.study.base.replicates = 10;
    } else if (preset == "desk") {
        s.chain.iterations = 2500;
        s.chain.burn_in = 500;
        s.chain.chains = 2;
        s.representative_draws = 25;
        s.score_draws = 500;
        s.mark_chain.iterations = 1500;
        s.mark_chain.warmup = 500;
        s.mark_chain.chains = 2;
        s.mark_chain.keep = 40;
        cfg.study.base.replicates = 5;
    } else {
        throw UsageError("unknown preset '" + preset + "' (expected paper or desk)");
    }
    cfg.preset = preset;
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw UsageError(std::string("config parse error: ") + e.what());
    }
    std::vector<std::pair<std::string, std::string>> entries;  // "section.key" -> value
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw UsageError("config key '" + section + "' must belong to a section");
        }
        for (const auto& [key, value] : body) {
            entries.emplace_back(section + "." + key, value.data());
        }
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || o.find('.') > eq) {
            throw UsageError("override '" + o + "' must look like section.key=value");
        }
        entries.emplace_back(o.substr(0, eq), o.substr(eq + 1));
    }

    RunConfig cfg;
    std::string preset = "paper";
    for (const auto& [k, v] : entries) {
        if (k == "chains.preset") preset = v;
    }
    apply_preset(cfg, preset);
    for (const auto& [k, v] : entries) {
        const auto dot = k.find('.');
        const Field& f = find_field(k.substr(0, dot), k.substr(dot + 1));
        if (k == "chains.preset" || k == "data.split_value") continue;
        try {
            f.set(cfg, v);
        } catch (const UsageError& e) {
            throw UsageError(k + ": " + e.what());
        }
    }
    // The split value is read once the split kind is known.
    for (const auto& [k, v] : entries) {
        if (k != "data.split_value") continue;
        try {
            find_field("data", "split_value").set(cfg, v);
        } catch (const UsageError& e) {
            throw UsageError(k + ": " + e.what());
        }
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::string text;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw UsageError("cannot open config file '" + path + "'");
        }
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return parse_config(text, overrides);
}

std::string resolved_config(const RunConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += f.key + " = " + f.get(cfg) + "\n";
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& f : fields()) {
        if (f.section == "prediction" || f.section == "study" || f.section == "output") continue;
        if (f.key == "threads" || f.key == "preset") continue;
        const std::string line = f.section + "." + f.key + "=" + f.get(cfg) + "\n";
        for (unsigned char ch : line) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string to_string(Transform t) {
    switch (t) {
        case Transform::identity: return "identity";
        case Transform::negative_log_return: return "negative-log-return";
        case Transform::daily_aggregate_sum: return "daily-aggregate-sum";
    }
    return "identity";
}

std::string to_string(SplitKind k) {
    switch (k) {
        case SplitKind::fraction: return "fraction";
        case SplitKind::date: return "date";
        case SplitKind::trailing_years: return "trailing-years";
        case SplitKind::time: return "time";
    }
    return "fraction";
}

}  // namespace hpot::pipeline
