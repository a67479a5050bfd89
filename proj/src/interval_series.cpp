#include "itsf/interval_series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "itsf/format.hpp"

namespace itsf {

std::string to_string(const Period& p) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", p.year, p.month);
    return buf;
}

CenterRadius to_center_radius(const Interval& iv) {
    return {(iv.lower + iv.upper) / 2.0, (iv.upper - iv.lower) / 2.0};
}

IntervalSeries::IntervalSeries(std::vector<Period> periods, std::vector<Interval> intervals,
                               Scale scale, int hour)
    : periods_(std::move(periods)), intervals_(std::move(intervals)), scale_(scale), hour_(hour) {
    if (periods_.size() != intervals_.size())
        throw DataError("period/interval count mismatch");
    if (periods_.empty())
        throw DataError("empty interval series");
    for (size_t t = 0; t < periods_.size(); ++t) {
        const Period& p = periods_[t];
        if (p.month < 1 || p.month > 12)
            throw DataError("bad month in period " + to_string(p));
        if (t > 0 && !(periods_[t - 1].next() == p))
            throw DataError("periods not contiguous at " + to_string(p));
        const Interval& iv = intervals_[t];
        if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper))
            throw DataError("non-finite bound at " + to_string(p));
        if (iv.lower > iv.upper)
            throw DataError("lower > upper at " + to_string(p));
    }
}

Eigen::ArrayXd IntervalSeries::lower() const {
    Eigen::ArrayXd out(size());
    for (Eigen::Index t = 0; t < size(); ++t) out[t] = intervals_[static_cast<size_t>(t)].lower;
    return out;
}

Eigen::ArrayXd IntervalSeries::upper() const {
    Eigen::ArrayXd out(size());
    for (Eigen::Index t = 0; t < size(); ++t) out[t] = intervals_[static_cast<size_t>(t)].upper;
    return out;
}

IntervalSeries IntervalSeries::slice(Eigen::Index start, Eigen::Index n) const {
    if (start < 0 || n < 1 || start + n > size())
        throw DataError("slice out of range");
    auto b = static_cast<size_t>(start);
    auto e = b + static_cast<size_t>(n);
    return IntervalSeries(std::vector<Period>(periods_.begin() + b, periods_.begin() + e),
                          std::vector<Interval>(intervals_.begin() + b, intervals_.begin() + e),
                          scale_, hour_);
}

IntervalSeries aggregate_to_intervals(const std::vector<ScalarRecord>& records, int hour,
                                      const AggregateOptions& opts,
                                      std::vector<std::string>* warnings) {
    if (hour < 1 || hour > 24)
        throw DataError("hour out of range: " + std::to_string(hour));

    std::map<std::pair<int, int>, std::pair<Interval, int>> months;  // (y,m) -> (minmax, count)
    for (const ScalarRecord& r : records) {
        if (r.hour != hour) continue;
        auto key = std::make_pair(r.date.year, r.date.month);
        auto it = months.find(key);
        if (it == months.end()) {
            months.emplace(key, std::make_pair(Interval{r.value, r.value}, 1));
        } else {
            it->second.first.lower = std::min(it->second.first.lower, r.value);
            it->second.first.upper = std::max(it->second.first.upper, r.value);
            it->second.second += 1;
        }
    }
    if (months.empty())
        throw DataError("no records for hour " + std::to_string(hour));

    std::vector<Period> periods;
    std::vector<Interval> intervals;
    Period expected{months.begin()->first.first, months.begin()->first.second};
    for (const auto& [key, agg] : months) {
        Period p{key.first, key.second};
        if (!(p == expected))
            throw DataError("missing month " + to_string(expected) + " for hour " +
                            std::to_string(hour));
        if (warnings && agg.second < opts.min_records_per_month)
            warnings->push_back("sparse month " + to_string(p) + " hour " + std::to_string(hour) +
                                ": " + std::to_string(agg.second) + " records");
        periods.push_back(p);
        intervals.push_back(agg.first);
        expected = p.next();
    }
    return IntervalSeries(std::move(periods), std::move(intervals), Scale::Raw, hour);
}

IntervalSeries log_transform(const IntervalSeries& s) {
    if (s.scale() == Scale::NaturalLog)
        throw DataError("series already log scale");
    std::vector<Interval> out;
    out.reserve(static_cast<size_t>(s.size()));
    for (const Interval& iv : s.intervals()) {
        if (iv.lower <= 0.0)
            throw DataError("log transform needs positive bounds");
        out.push_back({std::log(iv.lower), std::log(iv.upper)});
    }
    return IntervalSeries(s.periods(), std::move(out), Scale::NaturalLog, s.hour());
}

IntervalSeries exp_transform(const IntervalSeries& s) {
    if (s.scale() == Scale::Raw)
        throw DataError("series already raw scale");
    std::vector<Interval> out;
    out.reserve(static_cast<size_t>(s.size()));
    for (const Interval& iv : s.intervals())
        out.push_back({std::exp(iv.lower), std::exp(iv.upper)});
    return IntervalSeries(s.periods(), std::move(out), Scale::Raw, s.hour());
}

ComplexSeries to_complex(const IntervalSeries& s, ComplexMode mode) {
    ComplexSeries c;
    c.mode = mode;
    c.samples.resize(s.size());
    for (Eigen::Index t = 0; t < s.size(); ++t) {
        const Interval& iv = s.interval(t);
        c.samples[t] = mode == ComplexMode::Trans1
                           ? std::complex<double>(iv.lower, iv.upper)
                           : std::complex<double>(iv.upper, iv.lower);
    }
    return c;
}

RecoveredBounds from_complex(const ComplexSeries& c) {
    RecoveredBounds out;
    const Eigen::Index n = c.samples.size();
    out.lower.resize(n);
    out.upper.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        double a = c.samples[t].real();
        double b = c.samples[t].imag();
        double lo = c.mode == ComplexMode::Trans1 ? a : b;
        double up = c.mode == ComplexMode::Trans1 ? b : a;
        out.lower[t] = lo;
        out.upper[t] = up;
        if (lo > up) out.order_violations.push_back(t);
    }
    return out;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    if (lines.empty())
        throw DataError(path + ": empty file");
    return lines;
}

Date parse_iso_date(std::string_view s, const std::string& where) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw DataError(where + ": bad date '" + std::string(s) + "'");
    Date d;
    d.year = static_cast<int>(parse_long(s.substr(0, 4)));
    d.month = static_cast<int>(parse_long(s.substr(5, 2)));
    d.day = static_cast<int>(parse_long(s.substr(8, 2)));
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
        throw DataError(where + ": bad date '" + std::string(s) + "'");
    return d;
}

}  // namespace

std::vector<ScalarRecord> read_demand_csv(const std::string& path) {
    auto lines = read_lines(path);
    if (lines[0] != "date,hour,demand_mwh")
        throw DataError(path + ": expected header 'date,hour,demand_mwh'");
    std::vector<ScalarRecord> out;
    out.reserve(lines.size() - 1);
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        std::string where = path + ":" + std::to_string(i + 1);
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != 3)
            throw DataError(where + ": expected 3 fields");
        ScalarRecord r;
        r.date = parse_iso_date(fields[0], where);
        r.hour = static_cast<int>(parse_long(fields[1]));
        if (r.hour < 1 || r.hour > 24)
            throw DataError(where + ": hour out of range");
        r.value = parse_double(fields[2]);
        if (r.value <= 0.0)
            throw DataError(where + ": demand must be positive");
        out.push_back(r);
    }
    if (out.empty())
        throw DataError(path + ": no data rows");
    return out;
}

IntervalSeries read_interval_csv(const std::string& path, Scale scale) {
    auto lines = read_lines(path);
    if (lines[0] != "year,month,hour,lower,upper")
        throw DataError(path + ": expected header 'year,month,hour,lower,upper'");
    std::vector<Period> periods;
    std::vector<Interval> intervals;
    int hour = 0;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        std::string where = path + ":" + std::to_string(i + 1);
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != 5)
            throw DataError(where + ": expected 5 fields");
        Period p{static_cast<int>(parse_long(fields[0])), static_cast<int>(parse_long(fields[1]))};
        int h = static_cast<int>(parse_long(fields[2]));
        if (periods.empty())
            hour = h;
        else if (h != hour)
            throw DataError(where + ": mixed hours in one series");
        periods.push_back(p);
        intervals.push_back({parse_double(fields[3]), parse_double(fields[4])});
    }
    return IntervalSeries(std::move(periods), std::move(intervals), scale, hour);
}

std::string interval_csv_string(const IntervalSeries& s) {
    std::string out = "year,month,hour,lower,upper\n";
    for (Eigen::Index t = 0; t < s.size(); ++t) {
        const Period& p = s.period(t);
        const Interval& iv = s.interval(t);
        out += std::to_string(p.year) + "," + std::to_string(p.month) + "," +
               std::to_string(s.hour()) + "," + format_double(iv.lower) + "," +
               format_double(iv.upper) + "\n";
    }
    return out;
}

void write_interval_csv(const IntervalSeries& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path);
    out << interval_csv_string(s);
}

}  // namespace itsf
