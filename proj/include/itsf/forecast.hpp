#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "itsf/decompose.hpp"
#include "itsf/interval_series.hpp"
#include "itsf/stats.hpp"
#include "itsf/svr.hpp"

namespace itsf {

// Decomposition-plus-SVR pipeline settings. IMF components are modelled
// with the rbf grid, the residual component with the linear residue grid,
// and the per-bound recombination with the linear ensemble grid.
struct PipelineConfig {
    ComplexMode mode = ComplexMode::Trans1;
    SiftConfig sift;
    int lag_order = 12;   // autoregressive window per component
    // Lag windows end this many steps before the forecast target. Envelope
    // decompositions wobble over the last few samples of a window, so the
    // component models are trained to bridge the gap instead of reading the
    // unsettled tail. Training rows whose targets fall in that tail are
    // dropped for the same reason.
    int boundary_gap = 10;
    int cv_folds = 5;
    std::vector<SvrHyper> imf_grid;
    std::vector<SvrHyper> residue_grid;
    std::vector<SvrHyper> ensemble_grid;
    bool repair_swap = true;        // swap crossed bounds instead of failing
    bool retune_each_step = false;  // re-run grid search on every forecast
    std::uint64_t seed = 0;         // used by the one-shot entry points

    static PipelineConfig defaults();
};

// Raw-scale forecast bounds before the order repair.
struct BoundPair {
    double lower = 0.0;
    double upper = 0.0;
};

// Swaps crossed bounds when allowed (reporting it through `repaired`);
// throws NumericalError otherwise.
Interval repair_interval(const BoundPair& bp, bool swap_allowed, bool* repaired = nullptr);

// One-step-ahead forecaster. Histories arrive on their stored scale;
// forecasts always come back on the raw scale. begin_replication resets any
// tuned state and fixes the randomness for one replication.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual std::string name() const = 0;
    virtual void begin_replication(std::uint64_t /*seed*/) {}
    virtual BoundPair forecast(const IntervalSeries& history) = 0;
};

std::unique_ptr<Forecaster> make_naive_forecaster();
std::unique_ptr<Forecaster> make_bemd_svr_forecaster(const PipelineConfig& cfg);
std::unique_ptr<Forecaster> make_emd_svr_forecaster(const PipelineConfig& cfg);
std::unique_ptr<Forecaster> make_holt_forecaster(int multistarts = 8);
std::unique_ptr<Forecaster> make_vec_forecaster(int max_lag = 12);

// One-shot entry points built on the forecasters above.
Interval naive_forecast(const IntervalSeries& history);
Interval bemd_svr_forecast(const IntervalSeries& history, const PipelineConfig& cfg);
Interval emd_svr_forecast(const IntervalSeries& history, const PipelineConfig& cfg);
Interval holt_forecast(const IntervalSeries& history, std::uint64_t seed = 0,
                       int multistarts = 8);
Interval vec_forecast(const IntervalSeries& history, int max_lag = 12);

// Smoothing matrices of the interval exponential smoother; all entries lie
// strictly inside (0, 1).
struct HoltFit {
    Eigen::Matrix2d level_gain;
    Eigen::Matrix2d trend_gain;
    double sse = 0.0;
};

HoltFit fit_holt(const IntervalSeries& history, std::uint64_t seed = 0, int multistarts = 8);

// Error-correction fit on the bound differences with the fixed cointegrating
// vector (1, -1); lag order chosen by BIC.
struct VecFit {
    int lag = 1;
    Eigen::VectorXd coef_lower;  // intercept, lower lags, upper lags, width term
    Eigen::VectorXd coef_upper;
};

VecFit fit_vec(const IntervalSeries& history, int max_lag = 12);

struct ForecastRecord {
    int replication = 0;
    std::string model;
    Period period;
    Interval predicted;  // raw scale, repaired
    Interval actual;     // raw scale
    bool repaired = false;
};

void write_records_csv(const std::vector<ForecastRecord>& records, std::ostream& out);

struct EvalResult {
    std::vector<ForecastRecord> records;     // sorted by replication, period, model
    std::vector<AccuracySample> u_samples;   // one U value per replication per model
    int repair_count = 0;
};

// Walk-forward evaluation: for each replication the models see the
// estimation sample first and are then re-applied step by step over the
// hold-out with growing histories. A naive reference is appended when the
// caller does not supply one. Replication r uses seed base_seed + r.
EvalResult rolling_evaluation(const IntervalSeries& series, Eigen::Index split,
                              const std::vector<std::unique_ptr<Forecaster>>& models,
                              int replications, std::uint64_t base_seed);

// Deterministic seed derivation for sub-streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace itsf
