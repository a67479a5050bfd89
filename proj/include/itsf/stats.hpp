#pragma once

#include <string>
#include <vector>

#include "itsf/interval_series.hpp"

namespace itsf {

// Interval Theil inequality measure. `actuals` must carry one extra leading
// interval: the denominator compares each actual against its predecessor
// (the no-change forecast), so U = 1 for the naive model by construction.
double theil_u_interval(const IntervalSeries& actuals, const IntervalSeries& forecasts);

// Plain array variant; each actual series includes the leading prior value.
double theil_u_interval(const Eigen::ArrayXd& actual_lower, const Eigen::ArrayXd& actual_upper,
                        const Eigen::ArrayXd& forecast_lower,
                        const Eigen::ArrayXd& forecast_upper);

struct AccuracySample {
    std::string model;
    std::vector<double> values;  // one accuracy value per replication
};

struct AnovaResult {
    double f_stat = 0.0;
    double p_value = 1.0;
};

// One-way fixed-effects ANOVA across the samples.
AnovaResult one_way_anova(const std::vector<AccuracySample>& samples);

// Survival function of the F distribution via the regularized incomplete
// beta function.
double f_sf(double f, double df1, double df2);
double regularized_incomplete_beta(double a, double b, double x);

// Critical value of the studentized range; alpha is 0.05 or 0.01, groups
// 2..10. Between tabulated dfs the value is interpolated linearly in 1/df.
double studentized_range_critical(double alpha, int groups, double df);

struct PairComparison {
    std::string model_a;
    std::string model_b;
    double mean_diff = 0.0;  // mean_a - mean_b
    double q = 0.0;
    bool significant = false;
};

struct RankEntry {
    std::string model;
    double mean = 0.0;
    bool significant_vs_next = false;  // gap to the next-ranked model
};

struct ComparisonReport {
    AnovaResult anova;
    double alpha = 0.05;
    double q_critical = 0.0;
    std::vector<PairComparison> pairs;    // all unordered pairs
    std::vector<RankEntry> ranking;       // ascending mean (best first)
};

// Tukey's honestly-significant-difference test on equally sized samples.
ComparisonReport tukey_hsd(const std::vector<AccuracySample>& samples, double alpha = 0.05);

// Ranked line such as "a <* b < c": '*' marks adjacent pairs whose gap is
// significant at the report's alpha.
std::string render_ranking_line(const ComparisonReport& report);

}  // namespace itsf
