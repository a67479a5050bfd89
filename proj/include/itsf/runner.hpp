#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "itsf/forecast.hpp"
#include "itsf/interval_series.hpp"
#include "itsf/synthetic.hpp"

namespace itsf {

// Everything one evaluation run needs; mirrors the flat key=value config
// file, with command-line flags overriding file values.
struct RunConfig {
    std::string input;
    std::string output_dir;  // empty: $ITSF_OUTPUT_DIR, falling back to "."
    std::vector<int> hours;  // raw demand inputs only; empty = every hour found
    int split_year = 0;      // first hold-out period; unset = use holdout
    int split_month = 0;
    int holdout = 24;
    std::vector<std::string> models = {"bemd-svr-trans1", "bemd-svr-trans2", "emd-svr",
                                       "holt", "vec", "naive"};
    int replications = 20;
    std::uint64_t base_seed = 42;
    Scale input_scale = Scale::Raw;  // interval-series inputs: scale already applied
    int lag_order = 12;
    int boundary_gap = 10;
    int cv_folds = 5;
    int max_lag = 12;      // error-correction lag search bound
    int holt_starts = 8;
    std::string grid_preset = "fast";  // fast | full
    SiftConfig sift;
    bool retune_each_step = false;
    double alpha = 0.05;

    void validate() const;
};

// Flat key=value config file: one `key=value` per line, '#' comments.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);
void apply_config(RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv);

std::string resolve_output_dir(const std::string& configured);

std::uint64_t fnv1a_file(const std::string& path);

std::vector<SvrHyper> preset_grid(const std::string& preset, KernelKind kind);
PipelineConfig make_pipeline_config(const RunConfig& cfg, ComplexMode mode);
std::unique_ptr<Forecaster> make_forecaster(const std::string& name, const RunConfig& cfg);

// Walk-forward evaluation over every selected series; writes records,
// accuracy tables, the model comparison and a manifest into the output
// directory. Progress and data warnings go to `log`.
void run_evaluate(const RunConfig& cfg, std::ostream& log);

// Raw demand CSV -> one log-scale interval CSV per hour plus a manifest of
// record counts per month.
void run_ingest(const std::string& input, const std::string& output_dir,
                const std::vector<int>& hours, std::ostream& log);

void run_gen_synthetic(const SyntheticSpec& spec, const std::string& out_path);

struct DecomposeOptions {
    ComplexMode mode = ComplexMode::Trans1;
    SiftConfig sift;
};

// Decomposes one interval series and writes the long-format component dump;
// prints the component count and reconstruction error to `log`.
void run_decompose(const std::string& input, const std::string& out_path,
                   const DecomposeOptions& opts, std::ostream& log);

// One-step-ahead forecast from the full series; prints the forecast line and
// optionally appends it to a CSV.
void run_forecast(const std::string& input, const std::string& model, const RunConfig& cfg,
                  const std::string& out_path, std::ostream& log);

}  // namespace itsf
