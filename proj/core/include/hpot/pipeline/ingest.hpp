#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "hpot/evt.hpp"
#include "hpot/pipeline/config.hpp"

namespace hpot::pipeline {

struct ColumnMapping {
    std::string time{"time"};
    std::string value{"value"};
};

/// A raw series plus how its clock was derived. ISO dates become days since the first
/// observation; numeric times are used as given.
struct IngestedSeries {
    RawSeries series;
    bool iso_dates{false};
    std::optional<std::int64_t> origin_day;  // days since 1970-01-01 of t = 0 for ISO input
    std::string time_unit{"days"};
};

/// Days since 1970-01-01 of an ISO date (YYYY-MM-DD, optionally followed by a time part,
/// which is ignored). Throws DataError on malformed or impossible dates.
[[nodiscard]] std::int64_t parse_iso_day(const std::string& text);

/// Reads a CSV with a header row. Repeated timestamps are an error unless `aggregate` is
/// set, in which case their values are summed. Rows must be in time order.
[[nodiscard]] IngestedSeries ingest(std::istream& in, const ColumnMapping& mapping, bool aggregate);
[[nodiscard]] IngestedSeries ingest_file(const std::string& path, const ColumnMapping& mapping, bool aggregate);

/// identity; negative-log-return r_t = -(log x_t - log x_{t-1}) stamped at t;
/// daily-aggregate-sum groups observations by floor(t).
[[nodiscard]] RawSeries transform(const RawSeries& series, Transform kind);

struct SplitData {
    MarkedEventSeries train;
    MarkedEventSeries test;
    ResolvedThreshold threshold;
    double split_time{0.0};
};

/// Splits at the rule's time. Threshold and scale factor come from the training
/// observations only and are applied unchanged to the test window.
[[nodiscard]] SplitData split(const IngestedSeries& series, const SplitRule& rule, const ThresholdSpec& threshold,
                              const ScalePolicy& scale);

/// ingest_file + transform + window overrides + split, as configured.
[[nodiscard]] SplitData prepare_data(const RunConfig& cfg);

}  // namespace hpot::pipeline
