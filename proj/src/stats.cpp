#include "itsf/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace itsf {

double theil_u_interval(const Eigen::ArrayXd& actual_lower, const Eigen::ArrayXd& actual_upper,
                        const Eigen::ArrayXd& forecast_lower,
                        const Eigen::ArrayXd& forecast_upper) {
    const Eigen::Index h = forecast_lower.size();
    if (forecast_upper.size() != h)
        throw DataError("theil u: forecast bound lengths differ");
    if (actual_lower.size() != h + 1 || actual_upper.size() != h + 1)
        throw DataError("theil u: actuals must have one extra leading interval");
    if (h < 1)
        throw DataError("theil u: empty forecast");
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < h; ++i) {
        double du = actual_upper[i + 1] - forecast_upper[i];
        double dl = actual_lower[i + 1] - forecast_lower[i];
        num += du * du + dl * dl;
        double su = actual_upper[i + 1] - actual_upper[i];
        double sl = actual_lower[i + 1] - actual_lower[i];
        den += su * su + sl * sl;
    }
    if (den == 0.0)
        throw NumericalError("theil u: series is constant over the evaluation window");
    return std::sqrt(num / den);
}

double theil_u_interval(const IntervalSeries& actuals, const IntervalSeries& forecasts) {
    if (actuals.scale() != forecasts.scale())
        throw DataError("theil u: scale mismatch");
    if (actuals.size() != forecasts.size() + 1)
        throw DataError("theil u: actuals must have one extra leading interval");
    for (Eigen::Index i = 0; i < forecasts.size(); ++i)
        if (!(actuals.period(i + 1) == forecasts.period(i)))
            throw DataError("theil u: misaligned periods at " + to_string(forecasts.period(i)));
    return theil_u_interval(actuals.lower(), actuals.upper(), forecasts.lower(),
                            forecasts.upper());
}

namespace {

void validate_samples(const std::vector<AccuracySample>& samples, bool equal_sizes) {
    if (samples.size() < 2)
        throw DataError("need at least 2 samples to compare");
    for (const auto& s : samples)
        if (s.values.size() < 2)
            throw DataError("sample '" + s.model + "' has fewer than 2 values");
    if (equal_sizes)
        for (const auto& s : samples)
            if (s.values.size() != samples[0].values.size())
                throw NumericalError("unequal replication counts: unsupported design");
}

double sample_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

// Continued fraction for the incomplete beta (Lentz's method).
static double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= kEps) return h;
    }
    throw NumericalError("incomplete beta: continued fraction did not converge");
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw DataError("incomplete beta: parameters must be positive");
    if (x < 0.0 || x > 1.0)
        throw DataError("incomplete beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double f_sf(double f, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0))
        throw DataError("f distribution: degrees of freedom must be positive");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

AnovaResult one_way_anova(const std::vector<AccuracySample>& samples) {
    validate_samples(samples, false);
    double total_n = 0.0, grand_sum = 0.0;
    for (const auto& s : samples) {
        total_n += static_cast<double>(s.values.size());
        grand_sum = std::accumulate(s.values.begin(), s.values.end(), grand_sum);
    }
    double grand_mean = grand_sum / total_n;
    double ssb = 0.0, ssw = 0.0;
    for (const auto& s : samples) {
        double m = sample_mean(s.values);
        ssb += static_cast<double>(s.values.size()) * (m - grand_mean) * (m - grand_mean);
        for (double v : s.values) ssw += (v - m) * (v - m);
    }
    double df1 = static_cast<double>(samples.size()) - 1.0;
    double df2 = total_n - static_cast<double>(samples.size());

    AnovaResult r;
    if (ssw == 0.0 && ssb == 0.0) {  // every value identical
        r.f_stat = 0.0;
        r.p_value = 1.0;
        return r;
    }
    if (ssw == 0.0) {
        r.f_stat = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
        return r;
    }
    r.f_stat = (ssb / df1) / (ssw / df2);
    r.p_value = f_sf(r.f_stat, df1, df2);
    return r;
}

namespace {

// Critical values of the studentized range q(alpha; k, df) for k = 2..10.
// Rows: df = 1..20, 24, 30, 40, 60, 120, infinity.
constexpr std::array<double, 26> kQDf = {1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12, 13,
                                         14, 15, 16, 17, 18, 19, 20, 24, 30, 40, 60, 120,
                                         std::numeric_limits<double>::infinity()};

constexpr double kQ05[26][9] = {
    {17.97, 26.98, 32.82, 37.08, 40.41, 43.12, 45.40, 47.36, 49.07},
    {6.08, 8.33, 9.80, 10.88, 11.74, 12.44, 13.03, 13.54, 13.99},
    {4.50, 5.91, 6.82, 7.50, 8.04, 8.48, 8.85, 9.18, 9.46},
    {3.93, 5.04, 5.76, 6.29, 6.71, 7.05, 7.35, 7.60, 7.83},
    {3.64, 4.60, 5.22, 5.67, 6.03, 6.33, 6.58, 6.80, 6.99},
    {3.46, 4.34, 4.90, 5.30, 5.63, 5.90, 6.12, 6.32, 6.49},
    {3.34, 4.16, 4.68, 5.06, 5.36, 5.61, 5.82, 6.00, 6.16},
    {3.26, 4.04, 4.53, 4.89, 5.17, 5.40, 5.60, 5.77, 5.92},
    {3.20, 3.95, 4.41, 4.76, 5.02, 5.24, 5.43, 5.59, 5.74},
    {3.15, 3.88, 4.33, 4.65, 4.91, 5.12, 5.30, 5.46, 5.60},
    {3.11, 3.82, 4.26, 4.57, 4.82, 5.03, 5.20, 5.35, 5.49},
    {3.08, 3.77, 4.20, 4.51, 4.75, 4.95, 5.12, 5.27, 5.39},
    {3.06, 3.73, 4.15, 4.45, 4.69, 4.88, 5.05, 5.19, 5.32},
    {3.03, 3.70, 4.11, 4.41, 4.64, 4.83, 4.99, 5.13, 5.25},
    {3.01, 3.67, 4.08, 4.37, 4.59, 4.78, 4.94, 5.08, 5.20},
    {3.00, 3.65, 4.05, 4.33, 4.56, 4.74, 4.90, 5.03, 5.15},
    {2.98, 3.63, 4.02, 4.30, 4.52, 4.70, 4.86, 4.99, 5.11},
    {2.97, 3.61, 4.00, 4.28, 4.49, 4.67, 4.82, 4.96, 5.07},
    {2.96, 3.59, 3.98, 4.25, 4.47, 4.65, 4.79, 4.92, 5.04},
    {2.95, 3.58, 3.96, 4.23, 4.45, 4.62, 4.77, 4.90, 5.01},
    {2.92, 3.53, 3.90, 4.17, 4.37, 4.54, 4.68, 4.81, 4.92},
    {2.89, 3.49, 3.85, 4.10, 4.30, 4.46, 4.60, 4.72, 4.82},
    {2.86, 3.44, 3.79, 4.04, 4.23, 4.39, 4.52, 4.63, 4.73},
    {2.83, 3.40, 3.74, 3.98, 4.16, 4.31, 4.44, 4.55, 4.65},
    {2.80, 3.36, 3.68, 3.92, 4.10, 4.24, 4.36, 4.47, 4.56},
    {2.77, 3.31, 3.63, 3.86, 4.03, 4.17, 4.29, 4.39, 4.47},
};

constexpr double kQ01[26][9] = {
    {90.03, 135.0, 164.3, 185.6, 202.2, 215.8, 227.2, 237.0, 245.6},
    {14.04, 19.02, 22.29, 24.72, 26.63, 28.20, 29.53, 30.68, 31.69},
    {8.26, 10.62, 12.17, 13.33, 14.24, 15.00, 15.64, 16.20, 16.69},
    {6.51, 8.12, 9.17, 9.96, 10.58, 11.10, 11.55, 11.93, 12.27},
    {5.70, 6.98, 7.80, 8.42, 8.91, 9.32, 9.67, 9.97, 10.24},
    {5.24, 6.33, 7.03, 7.56, 7.97, 8.32, 8.61, 8.87, 9.10},
    {4.95, 5.92, 6.54, 7.01, 7.37, 7.68, 7.94, 8.17, 8.37},
    {4.75, 5.64, 6.20, 6.62, 6.96, 7.24, 7.47, 7.68, 7.86},
    {4.60, 5.43, 5.96, 6.35, 6.66, 6.91, 7.13, 7.33, 7.49},
    {4.48, 5.27, 5.77, 6.14, 6.43, 6.67, 6.87, 7.05, 7.21},
    {4.39, 5.15, 5.62, 5.97, 6.25, 6.48, 6.67, 6.84, 6.99},
    {4.32, 5.05, 5.50, 5.84, 6.10, 6.32, 6.51, 6.67, 6.81},
    {4.26, 4.96, 5.40, 5.73, 5.98, 6.19, 6.37, 6.53, 6.67},
    {4.21, 4.89, 5.32, 5.63, 5.88, 6.08, 6.26, 6.41, 6.54},
    {4.17, 4.84, 5.25, 5.56, 5.80, 5.99, 6.16, 6.31, 6.44},
    {4.13, 4.79, 5.19, 5.49, 5.72, 5.92, 6.08, 6.22, 6.35},
    {4.10, 4.74, 5.14, 5.43, 5.66, 5.85, 6.01, 6.15, 6.27},
    {4.07, 4.70, 5.09, 5.38, 5.60, 5.79, 5.94, 6.08, 6.20},
    {4.05, 4.67, 5.05, 5.33, 5.55, 5.73, 5.89, 6.02, 6.14},
    {4.02, 4.64, 5.02, 5.29, 5.51, 5.69, 5.84, 5.97, 6.09},
    {3.96, 4.55, 4.91, 5.17, 5.37, 5.54, 5.69, 5.81, 5.92},
    {3.89, 4.45, 4.80, 5.05, 5.24, 5.40, 5.54, 5.65, 5.76},
    {3.82, 4.37, 4.70, 4.93, 5.11, 5.26, 5.39, 5.50, 5.60},
    {3.76, 4.28, 4.59, 4.82, 4.99, 5.13, 5.25, 5.36, 5.45},
    {3.70, 4.20, 4.50, 4.71, 4.87, 5.01, 5.12, 5.21, 5.30},
    {3.64, 4.12, 4.40, 4.60, 4.76, 4.88, 4.99, 5.08, 5.16},
};

}  // namespace

double studentized_range_critical(double alpha, int groups, double df) {
    const double(*table)[9] = nullptr;
    if (alpha == 0.05) table = kQ05;
    else if (alpha == 0.01) table = kQ01;
    else throw DataError("studentized range: alpha must be 0.05 or 0.01");
    if (groups < 2 || groups > 10)
        throw NumericalError("studentized range: tabulated for 2..10 groups only");
    if (!(df >= 1.0))
        throw DataError("studentized range: df must be >= 1");
    const int col = groups - 2;

    size_t hi = 0;
    while (hi < kQDf.size() && kQDf[hi] < df) ++hi;
    if (hi == kQDf.size()) hi = kQDf.size() - 1;  // beyond 120: bracket with infinity
    if (kQDf[hi] == df || hi == 0) return table[hi][col];
    size_t lo = hi - 1;

    // Interpolate in 1/df; 1/infinity contributes 0.
    double x = 1.0 / df;
    double x_lo = 1.0 / kQDf[lo];
    double x_hi = std::isinf(kQDf[hi]) ? 0.0 : 1.0 / kQDf[hi];
    double w = (x_lo - x) / (x_lo - x_hi);
    return table[lo][col] + w * (table[hi][col] - table[lo][col]);
}

ComparisonReport tukey_hsd(const std::vector<AccuracySample>& samples, double alpha) {
    validate_samples(samples, true);
    const size_t k = samples.size();
    const double n = static_cast<double>(samples[0].values.size());
    const double df_within = static_cast<double>(k) * (n - 1.0);

    std::vector<double> means(k);
    double ssw = 0.0;
    for (size_t g = 0; g < k; ++g) {
        means[g] = sample_mean(samples[g].values);
        for (double v : samples[g].values) ssw += (v - means[g]) * (v - means[g]);
    }
    double msw = ssw / df_within;
    double denom = std::sqrt(msw / n);

    ComparisonReport rep;
    rep.alpha = alpha;
    rep.anova = one_way_anova(samples);
    rep.q_critical = studentized_range_critical(alpha, static_cast<int>(k), df_within);

    for (size_t a = 0; a < k; ++a) {
        for (size_t b = a + 1; b < k; ++b) {
            PairComparison pc;
            pc.model_a = samples[a].model;
            pc.model_b = samples[b].model;
            pc.mean_diff = means[a] - means[b];
            double d = std::abs(pc.mean_diff);
            pc.q = denom > 0.0 ? d / denom
                               : (d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
            pc.significant = pc.q > rep.q_critical;
            rep.pairs.push_back(pc);
        }
    }

    std::vector<size_t> order(k);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return means[a] < means[b]; });
    for (size_t r = 0; r < k; ++r) {
        RankEntry e;
        e.model = samples[order[r]].model;
        e.mean = means[order[r]];
        e.significant_vs_next = false;
        rep.ranking.push_back(e);
    }
    for (size_t r = 0; r + 1 < k; ++r) {
        const std::string& a = rep.ranking[r].model;
        const std::string& b = rep.ranking[r + 1].model;
        for (const auto& pc : rep.pairs) {
            if ((pc.model_a == a && pc.model_b == b) || (pc.model_a == b && pc.model_b == a)) {
                rep.ranking[r].significant_vs_next = pc.significant;
                break;
            }
        }
    }
    return rep;
}

std::string render_ranking_line(const ComparisonReport& report) {
    std::string out;
    for (size_t r = 0; r < report.ranking.size(); ++r) {
        if (r > 0) out += report.ranking[r - 1].significant_vs_next ? " <* " : " < ";
        out += report.ranking[r].model;
    }
    return out;
}

}  // namespace itsf
