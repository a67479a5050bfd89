#pragma once

#include <cstdint>

#include "itsf/interval_series.hpp"

namespace itsf {

// Cointegrated interval generator: the lower bound follows trend plus
// seasonality plus noise, and the upper bound adds a mean-reverting AR(1)
// width, so the two bounds share one stochastic trend.
struct SyntheticSpec {
    int length = 144;
    std::uint64_t seed = 1;
    double base = 0.0;              // level offset of the lower bound
    double trend_slope = 20.0;      // per month
    double seasonal_amplitude = 2000.0;
    double noise_stddev = 300.0;    // lower-bound innovation
    double radius_ar_coef = 0.7;    // AR(1) coefficient of the width
    double radius_mean = 2500.0;
    double radius_noise_stddev = 150.0;
    int hour = 1;
    Period start{2000, 1};
};

IntervalSeries gen_synthetic(const SyntheticSpec& spec);

}  // namespace itsf
