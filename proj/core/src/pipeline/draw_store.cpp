#include "hpot/pipeline/draw_store.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "hpot/errors.hpp"

namespace hpot::pipeline {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json kernel_to_json(const TriggeringKernel& k) {
    if (const auto* e = std::get_if<ExponentialKernel>(&k)) {
        return {{"type", "exponential"}, {"rate", e->rate}};
    }
    const auto& m = std::get<LognormalMixture>(k);
    return {{"type", "lognormal-mixture"},
            {"weights", m.weights},
            {"locations", m.locations},
            {"scales", m.scales},
            {"truncation", m.truncation}};
}

TriggeringKernel kernel_from_json(const json& j) {
    const std::string type = j.at("type");
    if (type == "exponential") {
        return ExponentialKernel{j.at("rate").get<double>()};
    }
    if (type != "lognormal-mixture") {
        throw DataError("draw store has an unknown kernel type '" + type + "'");
    }
    LognormalMixture m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.locations = j.at("locations").get<std::vector<double>>();
    m.scales = j.at("scales").get<std::vector<double>>();
    m.truncation = j.at("truncation").get<std::size_t>();
    return m;
}

}  // namespace

DrawStoreWriter::DrawStoreWriter(const std::string& path, const DrawStoreMeta& meta) : out_(path), path_(path) {
    if (!out_) {
        throw DataError("cannot create draw store '" + path + "'");
    }
    json j = {{"type", "meta"},
              {"format", "hpot-draws"},
              {"version", kFormatVersion},
              {"config_hash", meta.config_hash},
              {"seed", meta.seed},
              {"model", meta.model.name()},
              {"threshold", meta.threshold},
              {"negated", meta.negated},
              {"scale_factor", meta.scale_factor},
              {"window_start", meta.window_start},
              {"window_end", meta.window_end},
              {"train_events", meta.train_events},
              {"time_unit", meta.time_unit},
              {"kernel_acceptance", meta.kernel_acceptance},
              {"representative", meta.representative}};
    write_line(j.dump());
}

void DrawStoreWriter::write_line(const std::string& line) {
    out_ << line << '\n';
    if (!out_) {
        throw DataError("failed writing draw store '" + path_ + "'");
    }
}

void DrawStoreWriter::append(const PosteriorDraw& d) {
    json j = {{"type", "hawkes"},
              {"chain", d.chain},
              {"iteration", d.iteration},
              {"mu", d.hawkes.mu},
              {"kappa", d.hawkes.kappa},
              {"kernel", kernel_to_json(d.hawkes.kernel)},
              {"alpha_dp", d.alpha_dp},
              {"loglik", d.loglik},
              {"parents", d.branching.parents}};
    write_line(j.dump());
}

void DrawStoreWriter::append(const MarkFitEntry& e, MarkModel model) {
    json states = json::array();
    for (const auto& s : e.states) {
        states.push_back({{"log_sigma0", s.log_sigma0}, {"tau_sigma", s.tau_sigma}, {"xi", s.xi}, {"z", s.z}});
    }
    json j = {{"type", "markfit"},
              {"marks", to_string(model)},
              {"draw_index", e.draw_index},
              {"draw_chain", e.draw_chain},
              {"draw_iteration", e.draw_iteration},
              {"boundaries", e.partition.boundaries},
              {"states", std::move(states)}};
    write_line(j.dump());
}

void DrawStoreWriter::close() {
    out_.close();
}

void write_draw_store(const std::string& path, const DrawStoreMeta& meta, const FittedModel& fitted) {
    DrawStoreWriter w(path, meta);
    for (const auto& d : fitted.hawkes.draws) w.append(d);
    for (const auto& e : fitted.marks.entries) w.append(e, fitted.marks.model);
    w.close();
}

DrawStore read_draw_store(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open draw store '" + path + "'");
    }
    DrawStore store;
    bool have_meta = false;
    std::string line;
    std::size_t line_no = 0;
    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const json j = json::parse(line);
            const std::string type = j.at("type");
            if (type == "meta") {
                if (j.at("version").get<int>() != kFormatVersion) {
                    throw DataError("unsupported draw store version");
                }
                auto& m = store.meta;
                m.config_hash = j.at("config_hash");
                m.seed = j.at("seed");
                m.model = parse_model(j.at("model"));
                m.threshold = j.at("threshold");
                m.negated = j.at("negated");
                m.scale_factor = j.at("scale_factor");
                m.window_start = j.at("window_start");
                m.window_end = j.at("window_end");
                m.train_events = j.at("train_events");
                m.time_unit = j.at("time_unit");
                m.kernel_acceptance = j.at("kernel_acceptance");
                m.representative = j.at("representative").get<std::vector<std::size_t>>();
                store.fitted.spec = m.model;
                store.fitted.hawkes.model = m.model.kernel;
                store.fitted.hawkes.kernel_acceptance = m.kernel_acceptance;
                store.fitted.representative = m.representative;
                store.fitted.marks.model = m.model.marks;
                store.fitted.marks.scale_factor = m.scale_factor;
                have_meta = true;
            } else if (!have_meta) {
                throw DataError("draw store does not start with a metadata record");
            } else if (type == "hawkes") {
                PosteriorDraw d;
                d.chain = j.at("chain");
                d.iteration = j.at("iteration");
                d.hawkes.mu = j.at("mu");
                d.hawkes.kappa = j.at("kappa");
                d.hawkes.kernel = kernel_from_json(j.at("kernel"));
                d.alpha_dp = j.at("alpha_dp");
                d.loglik = j.at("loglik");
                d.branching.parents = j.at("parents").get<std::vector<std::int32_t>>();
                if (d.branching.size() != store.meta.train_events) {
                    throw DataError("branching length does not match the training events");
                }
                store.fitted.hawkes.draws.push_back(std::move(d));
            } else if (type == "markfit") {
                MarkFitEntry e;
                e.draw_index = j.at("draw_index");
                e.draw_chain = j.at("draw_chain");
                e.draw_iteration = j.at("draw_iteration");
                e.partition.boundaries = j.at("boundaries").get<std::vector<std::size_t>>();
                e.partition.assignment.resize(store.meta.train_events);
                std::size_t k = 0;
                for (std::size_t i = 0; i < store.meta.train_events; ++i) {
                    while (k + 1 < e.partition.boundaries.size() && e.partition.boundaries[k + 1] <= i) ++k;
                    e.partition.assignment[i] = k;
                }
                for (const auto& s : j.at("states")) {
                    GpdHierState st;
                    st.log_sigma0 = s.at("log_sigma0");
                    st.tau_sigma = s.at("tau_sigma");
                    st.xi = s.at("xi");
                    st.z = s.at("z").get<std::vector<double>>();
                    e.states.push_back(std::move(st));
                }
                store.fitted.marks.entries.push_back(std::move(e));
            } else {
                throw DataError("unknown record type '" + type + "'");
            }
        }
    } catch (const json::exception& e) {
        throw DataError(path + ":" + std::to_string(line_no) + ": malformed record (" + e.what() + ")");
    } catch (const UsageError& e) {
        throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_meta) {
        throw DataError("draw store '" + path + "' is empty");
    }
    return store;
}

void write_draws_csv(std::ostream& out, const std::vector<PosteriorDraw>& draws) {
    out << "chain,iteration,mu,kappa,beta,components,alpha_dp,background_events,loglik\n";
    out << std::setprecision(17);
    for (const auto& d : draws) {
        const auto* e = std::get_if<ExponentialKernel>(&d.hawkes.kernel);
        out << d.chain << ',' << d.iteration << ',' << d.hawkes.mu << ',' << d.hawkes.kappa << ',';
        if (e) {
            out << e->rate << ",1,";
        } else {
            out << ',' << std::get<LognormalMixture>(d.hawkes.kernel).size() << ',';
        }
        out << d.alpha_dp << ',' << d.branching.background_count() << ',' << d.loglik << '\n';
    }
}

}  // namespace hpot::pipeline
