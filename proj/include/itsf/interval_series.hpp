#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "itsf/errors.hpp"

namespace itsf {

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;
};

// Year-month label of one interval observation.
struct Period {
    int year = 0;
    int month = 0;  // 1..12

    Period next() const {
        return month == 12 ? Period{year + 1, 1} : Period{year, month + 1};
    }
    friend auto operator<=>(const Period&, const Period&) = default;
};

std::string to_string(const Period& p);

// One raw demand reading: calendar date, hour-of-day 1..24, MWh value.
struct ScalarRecord {
    Date date;
    int hour = 0;
    double value = 0.0;
};

enum class Scale { Raw, NaturalLog };
enum class ComplexMode { Trans1, Trans2 };

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

struct CenterRadius {
    double center = 0.0;
    double radius = 0.0;
};

CenterRadius to_center_radius(const Interval& iv);

// Monthly series of [lower, upper] intervals over contiguous periods.
// Immutable after construction; slicing returns copies.
class IntervalSeries {
public:
    IntervalSeries(std::vector<Period> periods, std::vector<Interval> intervals,
                   Scale scale = Scale::Raw, int hour = 0);

    Eigen::Index size() const { return static_cast<Eigen::Index>(intervals_.size()); }
    const Period& period(Eigen::Index t) const { return periods_[static_cast<size_t>(t)]; }
    const Interval& interval(Eigen::Index t) const { return intervals_[static_cast<size_t>(t)]; }
    const std::vector<Period>& periods() const { return periods_; }
    const std::vector<Interval>& intervals() const { return intervals_; }
    Scale scale() const { return scale_; }
    int hour() const { return hour_; }

    Eigen::ArrayXd lower() const;
    Eigen::ArrayXd upper() const;

    IntervalSeries prefix(Eigen::Index n) const { return slice(0, n); }
    IntervalSeries slice(Eigen::Index start, Eigen::Index n) const;

private:
    std::vector<Period> periods_;
    std::vector<Interval> intervals_;
    Scale scale_ = Scale::Raw;
    int hour_ = 0;
};

struct ComplexSeries {
    Eigen::ArrayXcd samples;
    ComplexMode mode = ComplexMode::Trans1;
};

// Bounds recovered from a complex series; the order invariant may be broken
// by modelling, so violations are reported rather than rejected.
struct RecoveredBounds {
    Eigen::ArrayXd lower;
    Eigen::ArrayXd upper;
    std::vector<Eigen::Index> order_violations;

    bool valid() const { return order_violations.empty(); }
};

struct AggregateOptions {
    int min_records_per_month = 20;
};

// Monthly min/max of the readings for one hour-of-day. Months must form a
// contiguous run; sparse months are reported through `warnings`.
IntervalSeries aggregate_to_intervals(const std::vector<ScalarRecord>& records, int hour,
                                      const AggregateOptions& opts = {},
                                      std::vector<std::string>* warnings = nullptr);

IntervalSeries log_transform(const IntervalSeries& s);
IntervalSeries exp_transform(const IntervalSeries& s);

ComplexSeries to_complex(const IntervalSeries& s, ComplexMode mode);
RecoveredBounds from_complex(const ComplexSeries& c);

// CSV schemas. Raw demand: header `date,hour,demand_mwh`, ISO dates.
// Interval series: header `year,month,hour,lower,upper`.
std::vector<ScalarRecord> read_demand_csv(const std::string& path);
IntervalSeries read_interval_csv(const std::string& path, Scale scale = Scale::Raw);
void write_interval_csv(const IntervalSeries& s, const std::string& path);
std::string interval_csv_string(const IntervalSeries& s);

}  // namespace itsf
