#include "hpot/pipeline/ingest.hpp"

#include <chrono>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

#include "hpot/errors.hpp"

namespace hpot::pipeline {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_number(const std::string& s, double& out) {
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

bool looks_like_date(const std::string& s) {
    return s.size() >= 10 && s[4] == '-' && s[7] == '-';
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw DataError("input has no column named '" + name + "'");
}

}  // namespace

std::int64_t parse_iso_day(const std::string& text) {
    using namespace std::chrono;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    const std::string s = trim(text);
    if (!looks_like_date(s) || std::from_chars(s.data(), s.data() + 4, y).ptr != s.data() + 4 ||
        std::from_chars(s.data() + 5, s.data() + 7, m).ptr != s.data() + 7 ||
        std::from_chars(s.data() + 8, s.data() + 10, d).ptr != s.data() + 10) {
        throw DataError("malformed ISO date '" + text + "'");
    }
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) {
        throw DataError("invalid calendar date '" + text + "'");
    }
    return sys_days{ymd}.time_since_epoch().count();
}

IngestedSeries ingest(std::istream& in, const ColumnMapping& mapping, bool aggregate) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_row(line);
            break;
        }
    }
    if (header.empty()) {
        throw DataError("input is empty");
    }
    const std::size_t ti = column_index(header, mapping.time);
    const std::size_t vi = column_index(header, mapping.value);

    IngestedSeries out;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::string> labels;
    std::optional<bool> dates;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() <= std::max(ti, vi)) {
            throw DataError("line " + std::to_string(line_no) + ": missing columns");
        }
        const std::string& ts = cells[ti];
        double t = 0.0;
        const bool is_date = looks_like_date(ts);
        if (dates && *dates != is_date) {
            throw DataError("line " + std::to_string(line_no) + ": mixed date and numeric times");
        }
        dates = is_date;
        if (is_date) {
            try {
                t = static_cast<double>(parse_iso_day(ts));
            } catch (const DataError& e) {
                throw DataError("line " + std::to_string(line_no) + ": " + e.what());
            }
        } else if (!parse_number(ts, t)) {
            throw DataError("line " + std::to_string(line_no) + ": cannot parse time '" + ts + "'");
        }
        double v = 0.0;
        if (!parse_number(cells[vi], v)) {
            throw DataError("line " + std::to_string(line_no) + ": cannot parse value '" + cells[vi] + "'");
        }
        if (!times.empty() && t == times.back()) {
            if (!aggregate) {
                throw DataError("line " + std::to_string(line_no) + ": duplicate timestamp " + ts +
                                " (select the daily-aggregate-sum transform to combine duplicates)");
            }
            values.back() += v;
            continue;
        }
        if (!times.empty() && t < times.back()) {
            throw DataError("line " + std::to_string(line_no) + ": timestamp " + ts + " is out of order");
        }
        times.push_back(t);
        values.push_back(v);
    }
    if (times.empty()) {
        throw DataError("input has a header but no observations");
    }
    out.iso_dates = dates.value_or(false);
    if (out.iso_dates) {
        const double origin = times.front();
        out.origin_day = static_cast<std::int64_t>(origin);
        for (double& t : times) t -= origin;
    } else {
        out.time_unit = "input units";
    }
    out.series = RawSeries::from(std::move(times), std::move(values));
    return out;
}

IngestedSeries ingest_file(const std::string& path, const ColumnMapping& mapping, bool aggregate) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open input file '" + path + "'");
    }
    try {
        return ingest(in, mapping, aggregate);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

RawSeries transform(const RawSeries& series, Transform kind) {
    RawSeries out;
    out.window_start = series.window_start;
    out.window_end = series.window_end;
    switch (kind) {
        case Transform::identity:
            return series;
        case Transform::negative_log_return:
            for (std::size_t i = 0; i < series.values.size(); ++i) {
                if (!(series.values[i] > 0.0)) {
                    throw DataError("negative-log-return needs strictly positive values (observation " +
                                    std::to_string(i + 1) + ")");
                }
            }
            for (std::size_t i = 1; i < series.values.size(); ++i) {
                out.times.push_back(series.times[i]);
                out.values.push_back(-(std::log(series.values[i]) - std::log(series.values[i - 1])));
            }
            return out;
        case Transform::daily_aggregate_sum:
            for (std::size_t i = 0; i < series.times.size(); ++i) {
                const double day = std::floor(series.times[i]);
                if (!out.times.empty() && out.times.back() == day) {
                    out.values.back() += series.values[i];
                } else {
                    out.times.push_back(day);
                    out.values.push_back(series.values[i]);
                }
            }
            return out;
    }
    return series;
}

SplitData split(const IngestedSeries& in, const SplitRule& rule, const ThresholdSpec& threshold,
                const ScalePolicy& scale) {
    const RawSeries& s = in.series;
    s.validate();
    const double start = s.window_start;
    const double end = s.window_end;
    double at = 0.0;
    switch (rule.kind) {
        case SplitKind::fraction:
            at = start + rule.value * (end - start);
            break;
        case SplitKind::time:
            at = rule.value;
            break;
        case SplitKind::trailing_years:
            at = end - 365.25 * rule.value;
            break;
        case SplitKind::date:
            if (!in.origin_day) {
                throw DataError("a date split needs ISO-dated input");
            }
            at = static_cast<double>(parse_iso_day(rule.date) - *in.origin_day);
            break;
    }
    if (!(at > start && at < end)) {
        throw DataError("split point lies outside the observation window");
    }
    RawSeries train;
    RawSeries test;
    for (std::size_t i = 0; i < s.size(); ++i) {
        RawSeries& dst = s.times[i] <= at ? train : test;
        dst.times.push_back(s.times[i]);
        dst.values.push_back(s.values[i]);
    }
    if (train.times.empty()) {
        throw DataError("training period contains no observations");
    }
    train.window_start = start;
    train.window_end = at;
    test.window_start = at;
    test.window_end = end;

    SplitData d;
    d.split_time = at;
    d.threshold = resolve_threshold(train.values, threshold);
    d.train = extract_exceedances(train, d.threshold);
    d.test = extract_exceedances(test, d.threshold);
    if (d.train.empty()) {
        throw DataError("no training exceedances above the threshold");
    }
    d.train = set_scale_factor(std::move(d.train), scale);
    d.test.scale_factor = d.train.scale_factor;
    return d;
}

SplitData prepare_data(const RunConfig& cfg) {
    if (cfg.data.input.empty()) {
        throw UsageError("data.input is not set");
    }
    const ColumnMapping mapping{cfg.data.time_column, cfg.data.value_column};
    IngestedSeries in = ingest_file(cfg.data.input, mapping, cfg.data.transform == Transform::daily_aggregate_sum);
    in.series = transform(in.series, cfg.data.transform);
    if (cfg.data.window_start) in.series.window_start = *cfg.data.window_start;
    if (cfg.data.window_end) in.series.window_end = *cfg.data.window_end;
    if (!in.series.times.empty() &&
        (in.series.times.front() < in.series.window_start || in.series.times.back() > in.series.window_end)) {
        throw DataError("observations fall outside the configured window");
    }
    return split(in, cfg.data.split, cfg.data.threshold, cfg.data.scale);
}

}  // namespace hpot::pipeline
