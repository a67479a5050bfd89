#include "itsf/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "itsf/format.hpp"
#include "itsf/stats.hpp"

namespace fs = std::filesystem;

namespace itsf {

namespace {

std::string trim(std::string_view v) {
    size_t b = v.find_first_not_of(" \t");
    if (b == std::string_view::npos) return "";
    size_t e = v.find_last_not_of(" \t");
    return std::string(v.substr(b, e - b + 1));
}

std::vector<int> parse_int_list(const std::string& v) {
    std::vector<int> out;
    for (auto tok : split_csv_line(v))
        if (!trim(tok).empty()) out.push_back(static_cast<int>(parse_long(trim(tok))));
    return out;
}

std::vector<std::string> parse_string_list(const std::string& v) {
    std::vector<std::string> out;
    for (auto tok : split_csv_line(v))
        if (!trim(tok).empty()) out.push_back(trim(tok));
    return out;
}

void parse_split(const std::string& v, int& year, int& month) {
    if (v.size() != 7 || v[4] != '-')
        throw DataError("split must look like YYYY-MM");
    year = static_cast<int>(parse_long(std::string_view(v).substr(0, 4)));
    month = static_cast<int>(parse_long(std::string_view(v).substr(5, 2)));
    if (month < 1 || month > 12)
        throw DataError("split month out of range");
}

std::string fdouble(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

}  // namespace

void RunConfig::validate() const {
    if (input.empty()) throw DataError("no input file given");
    if (replications < 1) throw DataError("replications must be >= 1");
    if (holdout < 2 && split_year == 0) throw DataError("holdout must be >= 2");
    if (lag_order < 1) throw DataError("lag_order must be >= 1");
    if (boundary_gap < 0) throw DataError("boundary_gap must be >= 0");
    if (cv_folds < 2) throw DataError("cv_folds must be >= 2");
    if (max_lag < 1) throw DataError("max_lag must be >= 1");
    if (holt_starts < 1) throw DataError("holt_starts must be >= 1");
    if (grid_preset != "fast" && grid_preset != "full")
        throw DataError("grid_preset must be fast or full");
    if (alpha != 0.05 && alpha != 0.01)
        throw DataError("alpha must be 0.05 or 0.01");
    if (models.empty()) throw DataError("model list is empty");
    for (int h : hours)
        if (h < 1 || h > 24) throw DataError("hours must lie in 1..24");
    sift.validate();
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected key=value");
        kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return kv;
}

void apply_config(RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "input") cfg.input = value;
        else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "hours") cfg.hours = parse_int_list(value);
        else if (key == "split") parse_split(value, cfg.split_year, cfg.split_month);
        else if (key == "holdout") cfg.holdout = static_cast<int>(parse_long(value));
        else if (key == "models") cfg.models = parse_string_list(value);
        else if (key == "replications") cfg.replications = static_cast<int>(parse_long(value));
        else if (key == "base_seed") cfg.base_seed = static_cast<std::uint64_t>(parse_long(value));
        else if (key == "input_scale") {
            if (value == "raw") cfg.input_scale = Scale::Raw;
            else if (value == "log") cfg.input_scale = Scale::NaturalLog;
            else throw DataError("input_scale must be raw or log");
        } else if (key == "lag_order") cfg.lag_order = static_cast<int>(parse_long(value));
        else if (key == "boundary_gap") cfg.boundary_gap = static_cast<int>(parse_long(value));
        else if (key == "cv_folds") cfg.cv_folds = static_cast<int>(parse_long(value));
        else if (key == "max_lag") cfg.max_lag = static_cast<int>(parse_long(value));
        else if (key == "holt_starts") cfg.holt_starts = static_cast<int>(parse_long(value));
        else if (key == "grid_preset") cfg.grid_preset = value;
        else if (key == "directions") cfg.sift.num_directions = static_cast<int>(parse_long(value));
        else if (key == "sd_threshold") cfg.sift.sd_threshold = parse_double(value);
        else if (key == "max_sift_iterations")
            cfg.sift.max_sift_iterations = static_cast<int>(parse_long(value));
        else if (key == "max_imfs") cfg.sift.max_imfs = static_cast<int>(parse_long(value));
        else if (key == "retune_each_step") cfg.retune_each_step = parse_long(value) != 0;
        else if (key == "alpha") cfg.alpha = parse_double(value);
        else throw DataError("unknown config key: " + key);
    }
}

std::string resolve_output_dir(const std::string& configured) {
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("ITSF_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::uint64_t h = 14695981039346656037ULL;
    char buf[16384];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::vector<SvrHyper> preset_grid(const std::string& preset, KernelKind kind) {
    if (preset == "full")
        return kind == KernelKind::Rbf ? default_rbf_grid() : default_linear_grid();
    if (preset != "fast")
        throw DataError("unknown grid preset: " + preset);
    // Condensed exponential grid: same shape as the full one, fewer knots,
    // so an evaluation run stays in the minutes range.
    std::vector<SvrHyper> grid;
    const double epsilons[] = {0.015625, 0.25};  // 2^-6, 2^-2
    if (kind == KernelKind::Rbf) {
        const double costs[] = {1.0, 16.0, 256.0};
        const double gammas[] = {0.0625, 0.25, 1.0};  // 2^-4, 2^-2, 2^0
        for (double c : costs)
            for (double e : epsilons)
                for (double g : gammas) grid.push_back({c, e, {KernelKind::Rbf, g}});
    } else {
        // Large costs buy nothing on the near-linear residue and ensemble
        // fits but make the solver bounce along the box for ages.
        const double costs[] = {1.0, 16.0};
        for (double c : costs)
            for (double e : epsilons) grid.push_back({c, e, {KernelKind::Linear, 1.0}});
    }
    return grid;
}

PipelineConfig make_pipeline_config(const RunConfig& cfg, ComplexMode mode) {
    PipelineConfig pc;
    pc.mode = mode;
    pc.sift = cfg.sift;
    pc.lag_order = cfg.lag_order;
    pc.boundary_gap = cfg.boundary_gap;
    pc.cv_folds = cfg.cv_folds;
    pc.imf_grid = preset_grid(cfg.grid_preset, KernelKind::Rbf);
    pc.residue_grid = preset_grid(cfg.grid_preset, KernelKind::Linear);
    pc.ensemble_grid = preset_grid(cfg.grid_preset, KernelKind::Linear);
    pc.retune_each_step = cfg.retune_each_step;
    pc.seed = cfg.base_seed;
    return pc;
}

std::unique_ptr<Forecaster> make_forecaster(const std::string& name, const RunConfig& cfg) {
    if (name == "naive") return make_naive_forecaster();
    if (name == "bemd-svr-trans1")
        return make_bemd_svr_forecaster(make_pipeline_config(cfg, ComplexMode::Trans1));
    if (name == "bemd-svr-trans2")
        return make_bemd_svr_forecaster(make_pipeline_config(cfg, ComplexMode::Trans2));
    if (name == "emd-svr")
        return make_emd_svr_forecaster(make_pipeline_config(cfg, ComplexMode::Trans1));
    if (name == "holt") return make_holt_forecaster(cfg.holt_starts);
    if (name == "vec") return make_vec_forecaster(cfg.max_lag);
    throw DataError("unknown model: " + name);
}

namespace {

bool is_demand_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header == "date,hour,demand_mwh") return true;
    if (header == "year,month,hour,lower,upper") return false;
    throw DataError(path + ": unrecognized header '" + header + "'");
}

Eigen::Index find_split(const IntervalSeries& s, const RunConfig& cfg) {
    Eigen::Index split;
    if (cfg.split_year != 0) {
        Period want{cfg.split_year, cfg.split_month};
        split = -1;
        for (Eigen::Index t = 0; t < s.size(); ++t)
            if (!(s.period(t) < want)) { split = t; break; }
        if (split < 0)
            throw DataError("split date after the end of the series");
    } else {
        split = s.size() - cfg.holdout;
    }
    if (split < 24)
        throw DataError("split leaves fewer than 24 estimation points");
    if (s.size() - split < 2)
        throw DataError("split leaves fewer than 2 hold-out points");
    return split;
}

struct HourResult {
    int hour = 0;
    Eigen::Index split = 0;
    IntervalSeries series;
    EvalResult eval;
};

void write_manifest(const RunConfig& cfg, const std::string& outdir, std::uint64_t digest) {
    std::ofstream out(fs::path(outdir) / "manifest.txt", std::ios::binary);
    if (!out) throw DataError("cannot write manifest");
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(digest));
    out << "itsf-evaluate-manifest v1\n";
    out << "version=0.1.0\n";
    out << "input=" << cfg.input << '\n';
    out << "input_fnv1a=" << hex << '\n';
    out << "output_dir=" << cfg.output_dir << '\n';
    out << "hours=";
    for (size_t i = 0; i < cfg.hours.size(); ++i)
        out << (i ? "," : "") << cfg.hours[i];
    out << '\n';
    if (cfg.split_year != 0)
        out << "split=" << to_string(Period{cfg.split_year, cfg.split_month}) << '\n';
    else
        out << "holdout=" << cfg.holdout << '\n';
    out << "models=";
    for (size_t i = 0; i < cfg.models.size(); ++i)
        out << (i ? "," : "") << cfg.models[i];
    out << '\n';
    out << "replications=" << cfg.replications << '\n';
    out << "base_seed=" << cfg.base_seed << '\n';
    out << "replication_seeds=" << cfg.base_seed << ".."
        << cfg.base_seed + static_cast<std::uint64_t>(cfg.replications - 1) << '\n';
    out << "input_scale=" << (cfg.input_scale == Scale::Raw ? "raw" : "log") << '\n';
    out << "lag_order=" << cfg.lag_order << '\n';
    out << "boundary_gap=" << cfg.boundary_gap << '\n';
    out << "cv_folds=" << cfg.cv_folds << '\n';
    out << "max_lag=" << cfg.max_lag << '\n';
    out << "holt_starts=" << cfg.holt_starts << '\n';
    out << "grid_preset=" << cfg.grid_preset << '\n';
    out << "directions=" << cfg.sift.num_directions << '\n';
    out << "sd_threshold=" << format_double(cfg.sift.sd_threshold) << '\n';
    out << "max_sift_iterations=" << cfg.sift.max_sift_iterations << '\n';
    out << "max_imfs=" << cfg.sift.max_imfs << '\n';
    out << "retune_each_step=" << (cfg.retune_each_step ? 1 : 0) << '\n';
    out << "alpha=" << format_double(cfg.alpha) << '\n';
}

}  // namespace

void run_evaluate(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    RunConfig eff = cfg;
    eff.output_dir = resolve_output_dir(cfg.output_dir);
    fs::create_directories(eff.output_dir);
    std::uint64_t digest = fnv1a_file(eff.input);

    std::vector<IntervalSeries> series_list;
    if (is_demand_input(eff.input)) {
        auto records = read_demand_csv(eff.input);
        std::vector<int> hours = eff.hours;
        if (hours.empty()) {
            std::set<int> found;
            for (const auto& r : records) found.insert(r.hour);
            hours.assign(found.begin(), found.end());
        }
        eff.hours = hours;
        for (int h : hours) {
            std::vector<std::string> warnings;
            IntervalSeries s = aggregate_to_intervals(records, h, {}, &warnings);
            for (const auto& w : warnings) log << "warning: " << w << '\n';
            series_list.push_back(log_transform(s));
        }
    } else {
        series_list.push_back(read_interval_csv(eff.input, eff.input_scale));
        eff.hours = {series_list[0].hour()};
    }

    std::vector<HourResult> results;
    for (auto& s : series_list) {
        Eigen::Index split = find_split(s, eff);
        std::vector<std::unique_ptr<Forecaster>> models;
        for (const auto& name : eff.models) models.push_back(make_forecaster(name, eff));
        log << "hour " << s.hour() << ": " << split << " estimation, " << (s.size() - split)
            << " hold-out, " << eff.replications << " replications\n";
        EvalResult eval =
            rolling_evaluation(s, split, models, eff.replications, eff.base_seed);
        log << "hour " << s.hour() << ": " << eval.repair_count << " repaired forecasts\n";
        results.push_back({s.hour(), split, std::move(s), std::move(eval)});
    }

    const fs::path outdir(eff.output_dir);

    // Per-hour forecast records.
    for (const auto& hr : results) {
        char name[32];
        std::snprintf(name, sizeof(name), "records_h%02d.csv", hr.hour);
        std::ofstream out(outdir / name, std::ios::binary);
        if (!out) throw DataError("cannot write records CSV");
        write_records_csv(hr.eval.records, out);
    }

    // Accuracy per replication.
    {
        std::ofstream out(outdir / "u_values.csv", std::ios::binary);
        if (!out) throw DataError("cannot write u_values.csv");
        out << "hour,model,replication,u\n";
        for (const auto& hr : results)
            for (const auto& sample : hr.eval.u_samples)
                for (size_t r = 0; r < sample.values.size(); ++r)
                    out << hr.hour << ',' << sample.model << ',' << r << ','
                        << format_double(sample.values[r]) << '\n';
    }

    // Mean accuracy, CSV and aligned text.
    {
        std::ofstream csv(outdir / "mean_u.csv", std::ios::binary);
        if (!csv) throw DataError("cannot write mean_u.csv");
        csv << "hour,model,mean_u\n";
        std::ofstream txt(outdir / "mean_u.txt", std::ios::binary);
        size_t width = 8;
        for (const auto& hr : results)
            for (const auto& sample : hr.eval.u_samples)
                width = std::max(width, sample.model.size() + 2);
        txt << "hour";
        if (!results.empty())
            for (const auto& sample : results[0].eval.u_samples) {
                txt << std::string(width - sample.model.size(), ' ') << sample.model;
            }
        txt << '\n';
        for (const auto& hr : results) {
            char hh[8];
            std::snprintf(hh, sizeof(hh), "%4d", hr.hour);
            txt << hh;
            for (const auto& sample : hr.eval.u_samples) {
                double mean = 0.0;
                for (double v : sample.values) mean += v;
                mean /= static_cast<double>(sample.values.size());
                csv << hr.hour << ',' << sample.model << ',' << format_double(mean) << '\n';
                std::string cell = fdouble(mean, 4);
                txt << std::string(width - cell.size(), ' ') << cell;
            }
            txt << '\n';
        }
    }

    // Model comparison per hour.
    {
        std::ofstream csv(outdir / "comparison.csv", std::ios::binary);
        std::ofstream pairs(outdir / "pairs.csv", std::ios::binary);
        std::ofstream txt(outdir / "comparison.txt", std::ios::binary);
        if (!csv || !pairs || !txt) throw DataError("cannot write comparison tables");
        csv << "hour,f_stat,p_value,q_critical,ranking\n";
        pairs << "hour,model_a,model_b,mean_diff,q,significant\n";
        for (const auto& hr : results) {
            if (eff.replications < 2) {
                txt << "hour " << hr.hour
                    << ": comparison skipped (needs at least 2 replications)\n";
                continue;
            }
            ComparisonReport rep = tukey_hsd(hr.eval.u_samples, eff.alpha);
            std::string ranking = render_ranking_line(rep);
            csv << hr.hour << ',' << format_double(rep.anova.f_stat) << ','
                << format_double(rep.anova.p_value) << ',' << format_double(rep.q_critical)
                << ',' << ranking << '\n';
            for (const auto& pc : rep.pairs)
                pairs << hr.hour << ',' << pc.model_a << ',' << pc.model_b << ','
                      << format_double(pc.mean_diff) << ',' << format_double(pc.q) << ','
                      << (pc.significant ? 1 : 0) << '\n';
            txt << "hour " << hr.hour << ": F=" << fdouble(rep.anova.f_stat, 4)
                << " p=" << fdouble(rep.anova.p_value, 6)
                << " q_crit=" << fdouble(rep.q_critical, 4)
                << " (alpha=" << format_double(rep.alpha) << ")\n";
            txt << "  " << ranking << '\n';
        }
    }

    write_manifest(eff, eff.output_dir, digest);
    log << "wrote tables to " << eff.output_dir << '\n';
}

void run_ingest(const std::string& input, const std::string& output_dir,
                const std::vector<int>& hours, std::ostream& log) {
    auto records = read_demand_csv(input);
    std::string outdir = resolve_output_dir(output_dir);
    fs::create_directories(outdir);

    std::vector<int> selected = hours;
    if (selected.empty()) {
        std::set<int> found;
        for (const auto& r : records) found.insert(r.hour);
        selected.assign(found.begin(), found.end());
    }
    for (int h : selected)
        if (h < 1 || h > 24) throw DataError("hours must lie in 1..24");

    std::ofstream manifest(fs::path(outdir) / "ingest_manifest.csv", std::ios::binary);
    if (!manifest) throw DataError("cannot write ingest manifest");
    manifest << "hour,year,month,records\n";

    for (int h : selected) {
        std::vector<std::string> warnings;
        IntervalSeries s = aggregate_to_intervals(records, h, {}, &warnings);
        for (const auto& w : warnings) log << "warning: " << w << '\n';
        IntervalSeries logged = log_transform(s);
        char name[32];
        std::snprintf(name, sizeof(name), "hour_%02d.csv", h);
        write_interval_csv(logged, (fs::path(outdir) / name).string());

        std::vector<int> counts(static_cast<size_t>(s.size()), 0);
        for (const auto& r : records)
            if (r.hour == h)
                for (Eigen::Index t = 0; t < s.size(); ++t)
                    if (s.period(t).year == r.date.year && s.period(t).month == r.date.month)
                        ++counts[static_cast<size_t>(t)];
        for (Eigen::Index t = 0; t < s.size(); ++t)
            manifest << h << ',' << s.period(t).year << ',' << s.period(t).month << ','
                     << counts[static_cast<size_t>(t)] << '\n';
        log << "hour " << h << ": " << s.size() << " months -> " << name << '\n';
    }
}

void run_gen_synthetic(const SyntheticSpec& spec, const std::string& out_path) {
    IntervalSeries s = gen_synthetic(spec);
    write_interval_csv(s, out_path);
}

void run_decompose(const std::string& input, const std::string& out_path,
                   const DecomposeOptions& opts, std::ostream& log) {
    IntervalSeries s = read_interval_csv(input);
    ComplexSeries c = to_complex(s, opts.mode);
    ComplexDecomposition d = bemd_decompose(c.samples, opts.sift);

    double scale = c.samples.abs().maxCoeff();
    double err = (d.reconstruct() - c.samples).abs().maxCoeff() / std::max(scale, 1e-300);
    log << "components: " << d.imfs.size() << " imf(s) + residual\n";
    log << "sift iterations:";
    for (int k : d.sift_counts) log << ' ' << k;
    log << '\n';
    log << "reconstruction error: " << format_double(err) << '\n';

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + out_path);
    write_decomposition_csv(d, out);
    if (!(err <= 1e-8))
        throw NumericalError("reconstruction error above 1e-8");
}

void run_forecast(const std::string& input, const std::string& model, const RunConfig& cfg,
                  const std::string& out_path, std::ostream& log) {
    IntervalSeries s = read_interval_csv(input, cfg.input_scale);
    auto f = make_forecaster(model, cfg);
    f->begin_replication(cfg.base_seed);
    bool repaired = false;
    Interval pred = repair_interval(f->forecast(s), true, &repaired);
    if (repaired) log << "note: bounds crossed and were swapped\n";
    Period next = s.period(s.size() - 1).next();
    log << model << ',' << next.year << ',' << next.month << ','
        << format_double(pred.lower) << ',' << format_double(pred.upper) << '\n';
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw DataError("cannot write " + out_path);
        out << "model,year,month,pred_lower,pred_upper\n";
        out << model << ',' << next.year << ',' << next.month << ','
            << format_double(pred.lower) << ',' << format_double(pred.upper) << '\n';
    }
}

}  // namespace itsf
