#include "itsf/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace itsf {

IntervalSeries gen_synthetic(const SyntheticSpec& spec) {
    if (spec.length < 2)
        throw DataError("synthetic: length must be >= 2");
    if (spec.radius_ar_coef <= -1.0 || spec.radius_ar_coef >= 1.0)
        throw DataError("synthetic: radius AR coefficient must lie in (-1, 1)");
    if (spec.noise_stddev < 0.0 || spec.radius_noise_stddev < 0.0)
        throw DataError("synthetic: noise stddev must be >= 0");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    auto noise = [&](double sd) { return sd > 0.0 ? sd * unit(rng) : 0.0; };

    std::vector<Period> periods;
    std::vector<Interval> intervals;
    periods.reserve(static_cast<size_t>(spec.length));
    intervals.reserve(static_cast<size_t>(spec.length));

    Period p = spec.start;
    double radius = std::max(spec.radius_mean, 0.01);
    for (int t = 0; t < spec.length; ++t) {
        double lower = spec.base + spec.trend_slope * t +
                       spec.seasonal_amplitude * std::sin(2.0 * std::numbers::pi * t / 12.0) +
                       noise(spec.noise_stddev);
        if (t > 0)
            radius = std::max(0.01, spec.radius_mean * (1.0 - spec.radius_ar_coef) +
                                        spec.radius_ar_coef * radius +
                                        noise(spec.radius_noise_stddev));
        intervals.push_back({lower, lower + radius});
        periods.push_back(p);
        p = p.next();
    }
    return IntervalSeries(std::move(periods), std::move(intervals), Scale::Raw, spec.hour);
}

}  // namespace itsf
