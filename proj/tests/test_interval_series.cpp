#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "itsf/errors.hpp"
#include "itsf/interval_series.hpp"

using namespace itsf;

namespace {

IntervalSeries make_series(std::initializer_list<Interval> ivs, Period start = {2000, 1},
                           Scale scale = Scale::Raw, int hour = 1) {
    std::vector<Period> periods;
    std::vector<Interval> intervals(ivs);
    Period p = start;
    for (size_t i = 0; i < intervals.size(); ++i) {
        periods.push_back(p);
        p = p.next();
    }
    return IntervalSeries(std::move(periods), std::move(intervals), scale, hour);
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("period arithmetic and formatting") {
    CHECK(Period{2000, 12}.next() == Period{2001, 1});
    CHECK(Period{2000, 3}.next() == Period{2000, 4});
    CHECK(Period{1999, 12} < Period{2000, 1});
    CHECK(to_string(Period{2003, 7}) == "2003-07");
}

TEST_CASE("center/radius decomposition is exact") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        double a = d(rng), b = d(rng);
        Interval iv{std::min(a, b), std::max(a, b)};
        CenterRadius cr = to_center_radius(iv);
        CHECK(cr.center - cr.radius == doctest::Approx(iv.lower).epsilon(1e-15));
        CHECK(cr.center + cr.radius == doctest::Approx(iv.upper).epsilon(1e-15));
        CHECK(cr.radius >= 0.0);
    }
}

TEST_CASE("series construction validates its invariants") {
    CHECK_NOTHROW(make_series({{1, 2}, {3, 3}}));
    // lower == upper is a legal degenerate interval
    CHECK_NOTHROW(make_series({{5, 5}}));
    CHECK_THROWS_AS(make_series({{2, 1}}), DataError);
    CHECK_THROWS_AS(make_series({}), DataError);
    double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(make_series({{nan, 1}}), DataError);
    CHECK_THROWS_AS(make_series({{0, std::numeric_limits<double>::infinity()}}), DataError);

    // periods must advance month by month
    std::vector<Period> gap = {{2000, 1}, {2000, 3}};
    std::vector<Interval> ivs = {{1, 2}, {1, 2}};
    CHECK_THROWS_AS(IntervalSeries(gap, ivs), DataError);
    std::vector<Period> dup = {{2000, 1}, {2000, 1}};
    CHECK_THROWS_AS(IntervalSeries(dup, ivs), DataError);
    std::vector<Period> badmonth = {{2000, 13}};
    CHECK_THROWS_AS(IntervalSeries(badmonth, {{1, 2}}), DataError);
    CHECK_THROWS_AS(IntervalSeries({{2000, 1}}, ivs), DataError);
}

TEST_CASE("slice and prefix copy the right window") {
    auto s = make_series({{1, 2}, {3, 4}, {5, 6}, {7, 8}});
    auto sl = s.slice(1, 2);
    CHECK(sl.size() == 2);
    CHECK(sl.period(0) == Period{2000, 2});
    CHECK(sl.interval(1).upper == 6);
    CHECK(sl.scale() == s.scale());
    CHECK(sl.hour() == s.hour());
    auto pre = s.prefix(3);
    CHECK(pre.size() == 3);
    CHECK(pre.interval(2).lower == 5);
    CHECK_THROWS_AS(s.slice(2, 3), DataError);
    CHECK_THROWS_AS(s.slice(-1, 2), DataError);
    CHECK_THROWS_AS(s.prefix(0), DataError);
}

TEST_CASE("aggregation takes monthly min/max for one hour") {
    std::vector<ScalarRecord> recs;
    // January 2001: values 10..40 at hour 5, plus decoys at other hours
    for (int day = 1; day <= 4; ++day) {
        recs.push_back({{2001, 1, day}, 5, 10.0 * day});
        recs.push_back({{2001, 1, day}, 6, 500.0});
    }
    // February 2001: constant 7
    for (int day = 1; day <= 3; ++day) recs.push_back({{2001, 2, day}, 5, 7.0});

    AggregateOptions opts;
    opts.min_records_per_month = 1;
    IntervalSeries s = aggregate_to_intervals(recs, 5, opts);
    REQUIRE(s.size() == 2);
    CHECK(s.period(0) == Period{2001, 1});
    CHECK(s.interval(0).lower == 10.0);
    CHECK(s.interval(0).upper == 40.0);
    CHECK(s.interval(1).lower == 7.0);
    CHECK(s.interval(1).upper == 7.0);
    CHECK(s.hour() == 5);
}

TEST_CASE("aggregation is order independent") {
    std::vector<ScalarRecord> recs;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> val(1.0, 100.0);
    for (int m = 1; m <= 3; ++m)
        for (int day = 1; day <= 25; ++day) recs.push_back({{2002, m, day}, 3, val(rng)});

    IntervalSeries a = aggregate_to_intervals(recs, 3);
    std::shuffle(recs.begin(), recs.end(), rng);
    IntervalSeries b = aggregate_to_intervals(recs, 3);
    REQUIRE(a.size() == b.size());
    for (Eigen::Index t = 0; t < a.size(); ++t) {
        CHECK(a.interval(t).lower == b.interval(t).lower);
        CHECK(a.interval(t).upper == b.interval(t).upper);
    }
}

TEST_CASE("aggregation reports gaps and sparse months") {
    std::vector<ScalarRecord> recs = {{{2001, 1, 1}, 2, 5.0}, {{2001, 3, 1}, 2, 6.0}};
    CHECK_THROWS_AS(aggregate_to_intervals(recs, 2), DataError);

    std::vector<ScalarRecord> sparse = {{{2001, 1, 1}, 2, 5.0}, {{2001, 1, 2}, 2, 6.0}};
    std::vector<std::string> warnings;
    AggregateOptions opts;  // default threshold 20
    aggregate_to_intervals(sparse, 2, opts, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("2001-01") != std::string::npos);

    CHECK_THROWS_AS(aggregate_to_intervals(recs, 9), DataError);   // no such hour
    CHECK_THROWS_AS(aggregate_to_intervals(recs, 25), DataError);  // out of range
}

TEST_CASE("log/exp transforms invert each other and check scale") {
    auto s = make_series({{1, 2}, {3, 9}});
    auto logged = log_transform(s);
    CHECK(logged.scale() == Scale::NaturalLog);
    CHECK(logged.interval(1).upper == doctest::Approx(std::log(9.0)));
    auto back = exp_transform(logged);
    CHECK(back.scale() == Scale::Raw);
    for (Eigen::Index t = 0; t < s.size(); ++t) {
        CHECK(back.interval(t).lower == doctest::Approx(s.interval(t).lower).epsilon(1e-14));
        CHECK(back.interval(t).upper == doctest::Approx(s.interval(t).upper).epsilon(1e-14));
    }
    CHECK_THROWS_AS(log_transform(logged), DataError);
    CHECK_THROWS_AS(exp_transform(s), DataError);
    CHECK_THROWS_AS(log_transform(make_series({{0, 1}})), DataError);
    CHECK_THROWS_AS(log_transform(make_series({{-2, -1}})), DataError);
}

TEST_CASE("complex construction puts the bounds in the advertised slots") {
    auto s = make_series({{1, 4}, {2, 5}});
    auto c1 = to_complex(s, ComplexMode::Trans1);
    CHECK(c1.samples[0] == std::complex<double>(1, 4));
    auto c2 = to_complex(s, ComplexMode::Trans2);
    CHECK(c2.samples[0] == std::complex<double>(4, 1));
    CHECK(c2.samples[1] == std::complex<double>(5, 2));

    RecoveredBounds r1 = from_complex(c1);
    CHECK(r1.valid());
    CHECK(r1.lower[1] == 2);
    CHECK(r1.upper[1] == 5);
    RecoveredBounds r2 = from_complex(c2);
    CHECK(r2.valid());
    CHECK(r2.lower[0] == 1);
    CHECK(r2.upper[0] == 4);
}

TEST_CASE("recovered bounds flag order violations instead of throwing") {
    ComplexSeries c;
    c.mode = ComplexMode::Trans1;
    c.samples.resize(2);
    c.samples[0] = {5.0, 2.0};  // lower 5 > upper 2
    c.samples[1] = {1.0, 3.0};
    RecoveredBounds r = from_complex(c);
    CHECK_FALSE(r.valid());
    REQUIRE(r.order_violations.size() == 1);
    CHECK(r.order_violations[0] == 0);
    CHECK(r.lower[0] == 5.0);
    CHECK(r.upper[0] == 2.0);
}

TEST_CASE("interval CSV round-trips") {
    auto s = make_series({{1.25, 2.5}, {3.0, 4.125}}, {1999, 12}, Scale::Raw, 7);
    std::string path = temp_path("itsf_test_roundtrip.csv");
    write_interval_csv(s, path);
    IntervalSeries back = read_interval_csv(path);
    REQUIRE(back.size() == s.size());
    CHECK(back.hour() == 7);
    CHECK(back.period(0) == Period{1999, 12});
    CHECK(back.period(1) == Period{2000, 1});
    for (Eigen::Index t = 0; t < s.size(); ++t) {
        CHECK(back.interval(t).lower == s.interval(t).lower);
        CHECK(back.interval(t).upper == s.interval(t).upper);
    }
    std::remove(path.c_str());
}

TEST_CASE("interval CSV rejects bad headers and mixed hours") {
    std::string path = temp_path("itsf_test_badcsv.csv");
    {
        std::ofstream out(path);
        out << "year,month,lower,upper\n2000,1,1,2\n";
    }
    CHECK_THROWS_AS(read_interval_csv(path), DataError);
    {
        std::ofstream out(path);
        out << "year,month,hour,lower,upper\n2000,1,1,1,2\n2000,2,3,1,2\n";
    }
    CHECK_THROWS_AS(read_interval_csv(path), DataError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_interval_csv(temp_path("itsf_no_such_file.csv")), DataError);
}

TEST_CASE("demand CSV parses and reports the offending line") {
    std::string path = temp_path("itsf_test_demand.csv");
    {
        std::ofstream out(path);
        out << "date,hour,demand_mwh\n2001-01-01,1,100.5\n2001-01-01,24,90\n";
    }
    auto recs = read_demand_csv(path);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].date.year == 2001);
    CHECK(recs[0].hour == 1);
    CHECK(recs[0].value == 100.5);
    CHECK(recs[1].hour == 24);

    {
        std::ofstream out(path);
        out << "date,hour,demand_mwh\n2001-01-01,1,100\n2001-01-01,25,90\n";
    }
    try {
        read_demand_csv(path);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }

    {
        std::ofstream out(path);
        out << "date,hour,demand_mwh\n2001-01-01,1,-5\n";
    }
    CHECK_THROWS_AS(read_demand_csv(path), DataError);
    {
        std::ofstream out(path);
        out << "date,hour,demand_mwh\n01/01/2001,1,5\n";
    }
    CHECK_THROWS_AS(read_demand_csv(path), DataError);
    std::remove(path.c_str());
}
