#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "itsf/format.hpp"
#include "itsf/runner.hpp"

namespace {

// Evaluate/forecast flags reuse the config-file keys: values collected here
// are applied on top of the config file, so the flag always wins.
struct KeyedFlags {
    std::vector<std::pair<std::string, std::string>> kv;

    void add(CLI::App* cmd, const std::string& flag, const std::string& key,
             const std::string& help) {
        cmd->add_option_function<std::string>(
               flag, [this, key](const std::string& v) { kv.emplace_back(key, v); }, help)
            ->expected(1);
    }

    void add_bool(CLI::App* cmd, const std::string& flag, const std::string& key,
                  const std::string& help) {
        cmd->add_flag_callback(flag, [this, key]() { kv.emplace_back(key, "1"); }, help);
    }
};

void add_run_options(CLI::App* cmd, KeyedFlags& flags, bool full) {
    flags.add(cmd, "--input", "input", "input CSV (raw demand or interval series)");
    flags.add(cmd, "--input-scale", "input_scale", "scale of an interval input: raw or log");
    flags.add(cmd, "--base-seed", "base_seed", "seed of replication 0");
    flags.add(cmd, "--lag-order", "lag_order", "autoregressive window per component");
    flags.add(cmd, "--boundary-gap", "boundary_gap",
              "steps between each lag window and its forecast target");
    flags.add(cmd, "--cv-folds", "cv_folds", "cross-validation folds");
    flags.add(cmd, "--max-lag", "max_lag", "error-correction lag search bound");
    flags.add(cmd, "--holt-starts", "holt_starts", "smoothing multi-start count");
    flags.add(cmd, "--grid-preset", "grid_preset", "hyperparameter grid: fast or full");
    flags.add(cmd, "--directions", "directions", "projection directions (multiple of 4)");
    flags.add(cmd, "--sd-threshold", "sd_threshold", "sifting stop threshold");
    flags.add(cmd, "--max-sift-iterations", "max_sift_iterations", "sift iteration cap");
    flags.add(cmd, "--max-imfs", "max_imfs", "component cap, 0 = unbounded");
    if (full) {
        flags.add(cmd, "--output-dir", "output_dir", "output directory");
        flags.add(cmd, "--hours", "hours", "comma-separated hours to process");
        flags.add(cmd, "--split", "split", "first hold-out period, YYYY-MM");
        flags.add(cmd, "--holdout", "holdout", "hold-out length if no split date");
        flags.add(cmd, "--models", "models", "comma-separated model list");
        flags.add(cmd, "--replications", "replications", "evaluation replications");
        flags.add_bool(cmd, "--retune-each-step", "retune_each_step",
                       "re-run the grid search at every hold-out step");
        flags.add(cmd, "--alpha", "alpha", "comparison significance level (0.05 or 0.01)");
    }
}

itsf::RunConfig build_config(const std::string& config_path,
                             const std::vector<std::pair<std::string, std::string>>& cli_kv) {
    itsf::RunConfig cfg;
    if (!config_path.empty()) itsf::apply_config(cfg, itsf::parse_config_file(config_path));
    itsf::apply_config(cfg, cli_kv);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"interval-valued time series forecasting"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "aggregate raw demand into interval series");
    std::string in_input, in_outdir, in_hours;
    ingest->add_option("--input", in_input, "raw demand CSV")->required();
    ingest->add_option("--output-dir", in_outdir, "output directory");
    ingest->add_option("--hours", in_hours, "comma-separated hours (default: all found)");

    // gen-synthetic
    auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic interval series");
    itsf::SyntheticSpec spec;
    std::string gen_out, gen_start;
    gen->add_option("--out", gen_out, "output CSV")->required();
    gen->add_option("--length", spec.length, "series length");
    gen->add_option("--seed", spec.seed, "generator seed");
    gen->add_option("--base", spec.base, "lower-bound level offset");
    gen->add_option("--trend-slope", spec.trend_slope, "trend per month");
    gen->add_option("--seasonal-amplitude", spec.seasonal_amplitude, "seasonal amplitude");
    gen->add_option("--noise-stddev", spec.noise_stddev, "lower-bound noise stddev");
    gen->add_option("--radius-ar", spec.radius_ar_coef, "width AR(1) coefficient");
    gen->add_option("--radius-mean", spec.radius_mean, "stationary width mean");
    gen->add_option("--radius-noise", spec.radius_noise_stddev, "width noise stddev");
    gen->add_option("--hour", spec.hour, "hour label of the series");
    gen->add_option("--start", gen_start, "first period, YYYY-MM (default 2000-01)");

    // decompose
    auto* dec = app.add_subcommand("decompose", "bivariate decomposition of one series");
    std::string dec_input, dec_out, dec_mode = "trans1";
    itsf::DecomposeOptions dec_opts;
    dec->add_option("--input", dec_input, "interval series CSV")->required();
    dec->add_option("--out", dec_out, "component dump CSV")->required();
    dec->add_option("--mode", dec_mode, "complex construction: trans1 or trans2");
    dec->add_option("--directions", dec_opts.sift.num_directions, "projection directions");
    dec->add_option("--sd-threshold", dec_opts.sift.sd_threshold, "sifting stop threshold");
    dec->add_option("--max-sift-iterations", dec_opts.sift.max_sift_iterations,
                    "sift iteration cap");
    dec->add_option("--max-imfs", dec_opts.sift.max_imfs, "component cap, 0 = unbounded");

    // forecast
    auto* fc = app.add_subcommand("forecast", "one-step-ahead forecast from a series");
    KeyedFlags fc_flags;
    std::string fc_model, fc_config, fc_out;
    fc->add_option("--model", fc_model, "model name")->required();
    fc->add_option("--config", fc_config, "flat key=value config file");
    fc->add_option("--out", fc_out, "also write the forecast row to this CSV");
    add_run_options(fc, fc_flags, false);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "walk-forward comparison of the model set");
    KeyedFlags ev_flags;
    std::string ev_config;
    ev->add_option("--config", ev_config, "flat key=value config file");
    add_run_options(ev, ev_flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (ingest->parsed()) {
            std::vector<int> hours;
            if (!in_hours.empty())
                for (auto tok : itsf::split_csv_line(in_hours))
                    hours.push_back(static_cast<int>(itsf::parse_long(tok)));
            itsf::run_ingest(in_input, in_outdir, hours, std::cout);
        } else if (gen->parsed()) {
            if (!gen_start.empty()) {
                if (gen_start.size() != 7 || gen_start[4] != '-')
                    throw itsf::DataError("start must look like YYYY-MM");
                spec.start.year =
                    static_cast<int>(itsf::parse_long(std::string_view(gen_start).substr(0, 4)));
                spec.start.month =
                    static_cast<int>(itsf::parse_long(std::string_view(gen_start).substr(5, 2)));
            }
            itsf::run_gen_synthetic(spec, gen_out);
            std::cout << "wrote " << gen_out << '\n';
        } else if (dec->parsed()) {
            if (dec_mode == "trans1") dec_opts.mode = itsf::ComplexMode::Trans1;
            else if (dec_mode == "trans2") dec_opts.mode = itsf::ComplexMode::Trans2;
            else throw itsf::DataError("mode must be trans1 or trans2");
            itsf::run_decompose(dec_input, dec_out, dec_opts, std::cout);
        } else if (fc->parsed()) {
            itsf::RunConfig cfg = build_config(fc_config, fc_flags.kv);
            itsf::run_forecast(cfg.input, fc_model, cfg, fc_out, std::cout);
        } else if (ev->parsed()) {
            itsf::RunConfig cfg = build_config(ev_config, ev_flags.kv);
            itsf::run_evaluate(cfg, std::cout);
        }
    } catch (const itsf::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const itsf::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
