#pragma once

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "hpot/predict.hpp"

namespace hpot::pipeline {

struct DrawStoreMeta {
    std::string config_hash;
    std::uint64_t seed{0};
    ModelSpec model;
    double threshold{0.0};
    bool negated{false};
    double scale_factor{1.0};
    double window_start{0.0};
    double window_end{0.0};
    std::size_t train_events{0};
    std::string time_unit{"days"};
    double kernel_acceptance{0.0};
    std::vector<std::size_t> representative;
};

/// Append-only NDJSON writer: one metadata record, then one record per Hawkes draw and
/// one per representative mark fit. Records are never rewritten.
class DrawStoreWriter {
public:
    DrawStoreWriter(const std::string& path, const DrawStoreMeta& meta);

    void append(const PosteriorDraw& draw);
    void append(const MarkFitEntry& entry, MarkModel model);
    void close();

private:
    void write_line(const std::string& line);

    std::ofstream out_;
    std::string path_;
};

struct DrawStore {
    DrawStoreMeta meta;
    FittedModel fitted;
};

void write_draw_store(const std::string& path, const DrawStoreMeta& meta, const FittedModel& fitted);
[[nodiscard]] DrawStore read_draw_store(const std::string& path);

/// Flat CSV of the Hawkes draws (one row per draw, no branchings).
void write_draws_csv(std::ostream& out, const std::vector<PosteriorDraw>& draws);

}  // namespace hpot::pipeline
