#include "itsf/forecast.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

#include "itsf/format.hpp"

namespace itsf {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig cfg;
    cfg.imf_grid = default_rbf_grid();
    cfg.residue_grid = default_linear_grid();
    cfg.ensemble_grid = default_linear_grid();
    return cfg;
}

Interval repair_interval(const BoundPair& bp, bool swap_allowed, bool* repaired) {
    if (repaired) *repaired = false;
    if (!std::isfinite(bp.lower) || !std::isfinite(bp.upper))
        throw NumericalError("forecast produced a non-finite bound");
    if (bp.lower <= bp.upper) return {bp.lower, bp.upper};
    if (!swap_allowed)
        throw NumericalError("forecast bounds crossed and repair is disabled");
    if (repaired) *repaired = true;
    return {bp.upper, bp.lower};
}

namespace {

Eigen::ArrayXd bound_array(const IntervalSeries& h, int bound) {
    return bound == 0 ? h.lower() : h.upper();
}

// ----- naive ---------------------------------------------------------------

class NaiveForecaster final : public Forecaster {
public:
    std::string name() const override { return "naive"; }
    BoundPair forecast(const IntervalSeries& history) override {
        Interval last = history.interval(history.size() - 1);
        if (history.scale() == Scale::NaturalLog)
            return {std::exp(last.lower), std::exp(last.upper)};
        return {last.lower, last.upper};
    }
};

// ----- decomposition + SVR pipelines ---------------------------------------

struct TargetScaler {
    double mean = 0.0;
    double std = 1.0;

    static TargetScaler fit(const Eigen::VectorXd& y) {
        TargetScaler s;
        s.mean = y.mean();
        s.std = std::sqrt((y.array() - s.mean).square().mean());
        if (s.std <= 0.0) s.std = 1.0;
        return s;
    }
    Eigen::VectorXd scale(const Eigen::VectorXd& y) const {
        return (y.array() - mean) / std;
    }
    double unscale(double v) const { return mean + std * v; }
};

struct CompModel {
    SvrModel model;
    TargetScaler scaler;
};

// Windows of d values end `gap` steps before their target; targets inside
// the last `gap` samples are dropped because the decomposition has not
// settled there yet.
void ar_embed(const Eigen::ArrayXd& c, int d, int gap, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
    const Eigen::Index rows = c.size() - d - 2 * static_cast<Eigen::Index>(gap);
    if (rows < 1)
        throw DataError("history too short for the lag order and boundary gap");
    X.resize(rows, d);
    y.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (int j = 0; j < d; ++j) X(r, j) = c[r + j];
        y[r] = c[r + d + gap];
    }
}

CompModel tune_component(const Eigen::ArrayXd& comp, int d, int gap,
                         const std::vector<SvrHyper>& grid, int folds, std::uint64_t seed) {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    ar_embed(comp, d, gap, X, y);
    CompModel cm;
    cm.scaler = TargetScaler::fit(y);
    Eigen::VectorXd ys = cm.scaler.scale(y);
    CvResult cv = svr_grid_search(X, ys, grid, folds, seed);
    cm.model = svr_train(X, ys, cv.best);
    return cm;
}

CompModel tune_ensemble(const std::vector<Eigen::ArrayXd>& comps, const Eigen::ArrayXd& bound,
                        int trim, const std::vector<SvrHyper>& grid, int folds,
                        std::uint64_t seed) {
    const Eigen::Index n = bound.size() - trim;
    if (n < 2)
        throw DataError("history too short for the lag order and boundary gap");
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(comps.size()));
    for (size_t j = 0; j < comps.size(); ++j)
        X.col(static_cast<Eigen::Index>(j)) = comps[j].head(n);
    Eigen::VectorXd y = bound.head(n).matrix();
    CompModel cm;
    cm.scaler = TargetScaler::fit(y);
    Eigen::VectorXd ys = cm.scaler.scale(y);
    CvResult cv = svr_grid_search(X, ys, grid, folds, seed);
    cm.model = svr_train(X, ys, cv.best);
    return cm;
}

double predict_component(const CompModel& cm, const Eigen::ArrayXd& comp, int d, int gap) {
    if (comp.size() < d + gap)
        throw DataError("history too short for the lag order and boundary gap");
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = comp[comp.size() - gap - d + j];
    return cm.scaler.unscale(cm.model.predict(x));
}

using ComponentStacks = std::array<std::vector<Eigen::ArrayXd>, 2>;

// Content fingerprint of a series; decompositions are pure functions of the
// bound values, so equal fingerprints let replications share them.
std::uint64_t series_fingerprint(const IntervalSeries& h) {
    std::uint64_t x = 14695981039346656037ULL;
    auto mix = [&x](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int k = 0; k < 64; k += 8) {
            x ^= (bits >> k) & 0xFF;
            x *= 1099511628211ULL;
        }
    };
    for (Eigen::Index t = 0; t < h.size(); ++t) {
        mix(h.interval(t).lower);
        mix(h.interval(t).upper);
    }
    return x;
}

// Decomposes the history into per-bound component stacks, each ending with
// the residual. With a cap the stack is padded with zero components so the
// width seen by the tuned models never changes between hold-out steps.
ComponentStacks extract_components(const IntervalSeries& h, const PipelineConfig& cfg,
                                   bool bivariate, const std::array<int, 2>& caps) {
    std::array<std::vector<Eigen::ArrayXd>, 2> out;
    const Eigen::Index n = h.size();
    if (bivariate) {
        SiftConfig sc = cfg.sift;
        if (caps[0] >= 0) sc.max_imfs = caps[0];
        ComplexSeries c = to_complex(h, cfg.mode);
        ComplexDecomposition d = bemd_decompose(c.samples, sc);
        auto split = [&](const Eigen::ArrayXcd& comp, int bound) {
            bool lower_is_real = cfg.mode == ComplexMode::Trans1;
            if ((bound == 0) == lower_is_real) return comp.real().eval();
            return comp.imag().eval();
        };
        for (int b = 0; b < 2; ++b) {
            for (const auto& imf : d.imfs) out[b].push_back(split(imf, b));
            while (caps[b] >= 0 && static_cast<int>(out[b].size()) < caps[b])
                out[b].push_back(Eigen::ArrayXd::Zero(n));
            out[b].push_back(split(d.residual, b));
        }
    } else {
        for (int b = 0; b < 2; ++b) {
            SiftConfig sc = cfg.sift;
            if (caps[b] >= 0) sc.max_imfs = caps[b];
            RealDecomposition d = emd_decompose(bound_array(h, b), sc);
            for (const auto& imf : d.imfs) out[b].push_back(imf);
            while (caps[b] >= 0 && static_cast<int>(out[b].size()) < caps[b])
                out[b].push_back(Eigen::ArrayXd::Zero(n));
            out[b].push_back(d.residual);
        }
    }
    return out;
}

class DecompSvrForecaster final : public Forecaster {
public:
    DecompSvrForecaster(PipelineConfig cfg, bool bivariate, std::string name)
        : cfg_(std::move(cfg)), bivariate_(bivariate), name_(std::move(name)) {
        cfg_.sift.validate();
        if (cfg_.lag_order < 1) throw DataError("lag order must be >= 1");
        if (cfg_.boundary_gap < 0) throw DataError("boundary gap must be >= 0");
        if (cfg_.imf_grid.empty() || cfg_.residue_grid.empty() || cfg_.ensemble_grid.empty())
            throw DataError("pipeline grids must not be empty");
        seed_ = cfg_.seed;
    }

    std::string name() const override { return name_; }

    void begin_replication(std::uint64_t seed) override {
        seed_ = seed;
        tuned_ = false;
    }

    BoundPair forecast(const IntervalSeries& history) override {
        if (!tuned_ || cfg_.retune_each_step) tune(history);
        const ComponentStacks& comps = components_for(history, caps_);
        double out[2];
        for (int b = 0; b < 2; ++b) {
            const auto& bm = bound_models_[static_cast<size_t>(b)];
            if (comps[b].size() != bm.components.size())
                throw NumericalError("component count drifted between steps");
            Eigen::VectorXd feats(static_cast<Eigen::Index>(comps[b].size()));
            for (size_t j = 0; j < comps[b].size(); ++j)
                feats[static_cast<Eigen::Index>(j)] =
                    predict_component(bm.components[j], comps[b][j], cfg_.lag_order,
                                      cfg_.boundary_gap);
            out[b] = bm.ensemble.scaler.unscale(bm.ensemble.model.predict(feats));
        }
        if (history.scale() == Scale::NaturalLog)
            return {std::exp(out[0]), std::exp(out[1])};
        return {out[0], out[1]};
    }

private:
    struct BoundModels {
        std::vector<CompModel> components;
        CompModel ensemble;
    };

    // Replications retune with fresh fold shuffles but see the exact same
    // histories, so the (seed-free) decompositions are memoized on content.
    const ComponentStacks& components_for(const IntervalSeries& h, const std::array<int, 2>& caps) {
        CacheKey key{series_fingerprint(h), h.size(), caps};
        auto it = decomp_cache_.find(key);
        if (it == decomp_cache_.end())
            it = decomp_cache_.emplace(key, extract_components(h, cfg_, bivariate_, caps)).first;
        return it->second;
    }

    void tune(const IntervalSeries& history) {
        const ComponentStacks& comps = components_for(history, {-1, -1});
        for (int b = 0; b < 2; ++b) {
            caps_[b] = static_cast<int>(comps[b].size()) - 1;
            BoundModels bm;
            for (size_t j = 0; j < comps[b].size(); ++j) {
                bool is_residual = j + 1 == comps[b].size();
                const auto& grid = is_residual ? cfg_.residue_grid : cfg_.imf_grid;
                // Seeds depend on the component index only, so identical
                // bounds get identical folds and identical models.
                bm.components.push_back(tune_component(comps[b][j], cfg_.lag_order,
                                                       cfg_.boundary_gap, grid, cfg_.cv_folds,
                                                       mix_seed(seed_, j)));
            }
            bm.ensemble = tune_ensemble(comps[b], bound_array(history, b), cfg_.boundary_gap,
                                        cfg_.ensemble_grid, cfg_.cv_folds,
                                        mix_seed(seed_, 0x10000));
            bound_models_[static_cast<size_t>(b)] = std::move(bm);
        }
        tuned_ = true;
    }

    using CacheKey = std::tuple<std::uint64_t, Eigen::Index, std::array<int, 2>>;

    PipelineConfig cfg_;
    bool bivariate_;
    std::string name_;
    std::uint64_t seed_ = 0;
    bool tuned_ = false;
    std::array<int, 2> caps_ = {-1, -1};
    std::array<BoundModels, 2> bound_models_;
    std::map<CacheKey, ComponentStacks> decomp_cache_;
};

// ----- interval exponential smoothing ---------------------------------------

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::Matrix2d gain_matrix(const double* th) {
    Eigen::Matrix2d m;
    m << logistic(th[0]), logistic(th[1]), logistic(th[2]), logistic(th[3]);
    return m;
}

double holt_sse(const Eigen::ArrayXd& lo, const Eigen::ArrayXd& up,
                const Eigen::VectorXd& th) {
    const Eigen::Index n = lo.size();
    Eigen::Matrix2d A = gain_matrix(th.data());
    Eigen::Matrix2d B = gain_matrix(th.data() + 4);
    Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    Eigen::Vector2d S(lo[1], up[1]);
    Eigen::Vector2d T(lo[1] - lo[0], up[1] - up[0]);
    double sse = 0.0;
    for (Eigen::Index t = 2; t < n; ++t) {
        Eigen::Vector2d y(lo[t], up[t]);
        Eigen::Vector2d pred = S + T;
        sse += (y - pred).squaredNorm();
        Eigen::Vector2d s_new = A * y + (I - A) * pred;
        T = B * (s_new - S) + (I - B) * T;
        S = s_new;
    }
    return sse;
}

// Plain BFGS with backtracking line search and central-difference gradients.
template <typename Fn>
double bfgs_minimize(const Fn& f, Eigen::VectorXd& x, int max_iter = 150) {
    const Eigen::Index d = x.size();
    auto grad = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd g(d);
        Eigen::VectorXd q = p;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double h = 1e-6;
            q[i] = p[i] + h;
            double fp = f(q);
            q[i] = p[i] - h;
            double fm = f(q);
            q[i] = p[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        return g;
    };

    double fx = f(x);
    Eigen::VectorXd g = grad(x);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d);
    for (int it = 0; it < max_iter; ++it) {
        if (g.lpNorm<Eigen::Infinity>() < 1e-9) break;
        Eigen::VectorXd p = -H * g;
        double slope = g.dot(p);
        if (slope >= 0.0) {  // lost positive definiteness; restart steepest
            H.setIdentity();
            p = -g;
            slope = g.dot(p);
        }
        double step = 1.0;
        double fn = fx;
        Eigen::VectorXd xn = x;
        bool ok = false;
        for (int ls = 0; ls < 50; ++ls) {
            xn = x + step * p;
            fn = f(xn);
            if (fn <= fx + 1e-4 * step * slope) { ok = true; break; }
            step *= 0.5;
        }
        if (!ok) break;
        Eigen::VectorXd gn = grad(xn);
        Eigen::VectorXd s = xn - x;
        Eigen::VectorXd yv = gn - g;
        double sy = s.dot(yv);
        if (sy > 1e-12) {
            Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
            Eigen::MatrixXd V = eye - (s * yv.transpose()) / sy;
            H = V * H * V.transpose() + (s * s.transpose()) / sy;
        }
        double df = fx - fn;
        x = xn;
        fx = fn;
        g = gn;
        if (df < 1e-15 * (1.0 + std::abs(fx))) break;
    }
    return fx;
}

class HoltForecaster final : public Forecaster {
public:
    explicit HoltForecaster(int multistarts) : multistarts_(multistarts) {
        if (multistarts_ < 1) throw DataError("holt: need at least one start");
    }
    std::string name() const override { return "holt"; }
    void begin_replication(std::uint64_t seed) override { seed_ = seed; }

    BoundPair forecast(const IntervalSeries& history) override {
        HoltFit fit = fit_holt(history, seed_, multistarts_);
        Eigen::ArrayXd lo = history.lower(), up = history.upper();
        const Eigen::Index n = lo.size();
        Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
        Eigen::Vector2d S(lo[1], up[1]);
        Eigen::Vector2d T(lo[1] - lo[0], up[1] - up[0]);
        for (Eigen::Index t = 2; t < n; ++t) {
            Eigen::Vector2d y(lo[t], up[t]);
            Eigen::Vector2d s_new = fit.level_gain * y + (I - fit.level_gain) * (S + T);
            T = fit.trend_gain * (s_new - S) + (I - fit.trend_gain) * T;
            S = s_new;
        }
        Eigen::Vector2d pred = S + T;
        if (history.scale() == Scale::NaturalLog)
            return {std::exp(pred[0]), std::exp(pred[1])};
        return {pred[0], pred[1]};
    }

private:
    int multistarts_ = 8;
    std::uint64_t seed_ = 0;
};

// ----- error-correction model ---------------------------------------------

struct VecDesign {
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;  // columns: d_lower, d_upper
};

// Rows for targets dl[s], du[s], s in [first, n-2]: intercept, p lags of each
// difference, and the lagged width (the error-correction term).
VecDesign vec_design(const Eigen::ArrayXd& dl, const Eigen::ArrayXd& du,
                     const Eigen::ArrayXd& width, int p, Eigen::Index first) {
    const Eigen::Index last = dl.size() - 1;
    const Eigen::Index rows = last - first + 1;
    VecDesign d;
    d.X.resize(rows, 2 * p + 2);
    d.Y.resize(rows, 2);
    for (Eigen::Index r = 0; r < rows; ++r) {
        Eigen::Index s = first + r;
        d.X(r, 0) = 1.0;
        for (int j = 1; j <= p; ++j) {
            d.X(r, j) = dl[s - j];
            d.X(r, p + j) = du[s - j];
        }
        d.X(r, 2 * p + 1) = width[s];  // width at the level preceding target s
        d.Y(r, 0) = dl[s];
        d.Y(r, 1) = du[s];
    }
    return d;
}

}  // namespace

HoltFit fit_holt(const IntervalSeries& history, std::uint64_t seed, int multistarts) {
    if (history.size() < 3)
        throw DataError("holt: need at least 3 observations");
    if (multistarts < 1)
        throw DataError("holt: need at least one start");
    Eigen::ArrayXd lo = history.lower(), up = history.upper();
    auto objective = [&](const Eigen::VectorXd& th) { return holt_sse(lo, up, th); };

    double best_f = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_th = Eigen::VectorXd::Zero(8);
    for (int k = 0; k < multistarts; ++k) {
        Eigen::VectorXd th = Eigen::VectorXd::Zero(8);
        if (k > 0) {
            std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
            std::normal_distribution<double> dist(0.0, 1.5);
            for (Eigen::Index i = 0; i < 8; ++i) th[i] = dist(rng);
        }
        double f = bfgs_minimize(objective, th);
        if (f < best_f) {
            best_f = f;
            best_th = th;
        }
    }
    HoltFit fit;
    fit.level_gain = gain_matrix(best_th.data());
    fit.trend_gain = gain_matrix(best_th.data() + 4);
    fit.sse = best_f;
    return fit;
}

VecFit fit_vec(const IntervalSeries& history, int max_lag) {
    if (max_lag < 1)
        throw DataError("vec: max lag must be >= 1");
    const Eigen::Index n = history.size();
    if (n < 3 * max_lag + 10)
        throw DataError("vec: history too short for the lag search");
    Eigen::ArrayXd lo = history.lower(), up = history.upper();
    Eigen::ArrayXd dl = lo.tail(n - 1) - lo.head(n - 1);
    Eigen::ArrayXd du = up.tail(n - 1) - up.head(n - 1);
    Eigen::ArrayXd width = up - lo;

    double scale = std::max({1.0, lo.abs().maxCoeff(), up.abs().maxCoeff()});
    if (dl.abs().maxCoeff() < 1e-10 * scale && du.abs().maxCoeff() < 1e-10 * scale)
        throw NumericalError("vec: constant series, differences are all zero");

    // BIC on the common trimmed sample so every lag sees the same rows.
    int best_p = 1;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= max_lag; ++p) {
        VecDesign d = vec_design(dl, du, width, p, max_lag);
        const double rows = static_cast<double>(d.X.rows());
        Eigen::MatrixXd B = d.X.completeOrthogonalDecomposition().solve(d.Y);
        Eigen::MatrixXd E = d.Y - d.X * B;
        Eigen::Matrix2d sigma = (E.transpose() * E) / rows;
        double det = sigma.determinant();
        double lndet = det > 0.0 ? std::log(det) : -1e6;
        double k = static_cast<double>(2 * (2 * p + 2));
        double bic = lndet + k * std::log(rows) / rows;
        if (bic < best_bic) {
            best_bic = bic;
            best_p = p;
        }
    }

    VecDesign d = vec_design(dl, du, width, best_p, best_p);
    Eigen::MatrixXd B = d.X.completeOrthogonalDecomposition().solve(d.Y);
    VecFit fit;
    fit.lag = best_p;
    fit.coef_lower = B.col(0);
    fit.coef_upper = B.col(1);
    return fit;
}

namespace {

class VecForecaster final : public Forecaster {
public:
    explicit VecForecaster(int max_lag) : max_lag_(max_lag) {}
    std::string name() const override { return "vec"; }

    BoundPair forecast(const IntervalSeries& history) override {
        VecFit fit = fit_vec(history, max_lag_);
        const Eigen::Index n = history.size();
        Eigen::ArrayXd lo = history.lower(), up = history.upper();
        Eigen::ArrayXd dl = lo.tail(n - 1) - lo.head(n - 1);
        Eigen::ArrayXd du = up.tail(n - 1) - up.head(n - 1);
        const int p = fit.lag;
        Eigen::VectorXd x(2 * p + 2);
        x[0] = 1.0;
        for (int j = 1; j <= p; ++j) {
            x[j] = dl[dl.size() - j];
            x[p + j] = du[du.size() - j];
        }
        x[2 * p + 1] = up[n - 1] - lo[n - 1];
        double pl = lo[n - 1] + fit.coef_lower.dot(x);
        double pu = up[n - 1] + fit.coef_upper.dot(x);
        if (history.scale() == Scale::NaturalLog)
            return {std::exp(pl), std::exp(pu)};
        return {pl, pu};
    }

private:
    int max_lag_;
};

}  // namespace

std::unique_ptr<Forecaster> make_naive_forecaster() { return std::make_unique<NaiveForecaster>(); }

std::unique_ptr<Forecaster> make_bemd_svr_forecaster(const PipelineConfig& cfg) {
    std::string name = cfg.mode == ComplexMode::Trans1 ? "bemd-svr-trans1" : "bemd-svr-trans2";
    return std::make_unique<DecompSvrForecaster>(cfg, true, name);
}

std::unique_ptr<Forecaster> make_emd_svr_forecaster(const PipelineConfig& cfg) {
    return std::make_unique<DecompSvrForecaster>(cfg, false, "emd-svr");
}

std::unique_ptr<Forecaster> make_holt_forecaster(int multistarts) {
    return std::make_unique<HoltForecaster>(multistarts);
}

std::unique_ptr<Forecaster> make_vec_forecaster(int max_lag) {
    return std::make_unique<VecForecaster>(max_lag);
}

namespace {

Interval one_shot(Forecaster& f, const IntervalSeries& history, bool swap_allowed) {
    return repair_interval(f.forecast(history), swap_allowed);
}

}  // namespace

Interval naive_forecast(const IntervalSeries& history) {
    NaiveForecaster f;
    return one_shot(f, history, false);
}

Interval bemd_svr_forecast(const IntervalSeries& history, const PipelineConfig& cfg) {
    auto f = make_bemd_svr_forecaster(cfg);
    f->begin_replication(cfg.seed);
    return one_shot(*f, history, cfg.repair_swap);
}

Interval emd_svr_forecast(const IntervalSeries& history, const PipelineConfig& cfg) {
    auto f = make_emd_svr_forecaster(cfg);
    f->begin_replication(cfg.seed);
    return one_shot(*f, history, cfg.repair_swap);
}

Interval holt_forecast(const IntervalSeries& history, std::uint64_t seed, int multistarts) {
    HoltForecaster f(multistarts);
    f.begin_replication(seed);
    return one_shot(f, history, true);
}

Interval vec_forecast(const IntervalSeries& history, int max_lag) {
    VecForecaster f(max_lag);
    return one_shot(f, history, true);
}

void write_records_csv(const std::vector<ForecastRecord>& records, std::ostream& out) {
    out << "replication,model,year,month,pred_lower,pred_upper,actual_lower,actual_upper,"
           "repaired\n";
    for (const auto& r : records) {
        out << r.replication << ',' << r.model << ',' << r.period.year << ',' << r.period.month
            << ',' << format_double(r.predicted.lower) << ',' << format_double(r.predicted.upper)
            << ',' << format_double(r.actual.lower) << ',' << format_double(r.actual.upper) << ','
            << (r.repaired ? 1 : 0) << '\n';
    }
}

EvalResult rolling_evaluation(const IntervalSeries& series, Eigen::Index split,
                              const std::vector<std::unique_ptr<Forecaster>>& models,
                              int replications, std::uint64_t base_seed) {
    const Eigen::Index n = series.size();
    if (split < 1 || n - split < 2)
        throw DataError("rolling evaluation: split leaves no usable hold-out");
    if (replications < 1)
        throw DataError("rolling evaluation: need at least one replication");
    if (models.empty())
        throw DataError("rolling evaluation: no models given");

    std::vector<Forecaster*> active;
    for (const auto& m : models) active.push_back(m.get());
    std::unique_ptr<Forecaster> fallback_naive;
    if (std::none_of(active.begin(), active.end(),
                     [](Forecaster* f) { return f->name() == "naive"; })) {
        fallback_naive = make_naive_forecaster();
        active.push_back(fallback_naive.get());
    }

    const Eigen::Index horizon = n - split;
    IntervalSeries raw = series.scale() == Scale::NaturalLog ? exp_transform(series) : series;

    EvalResult res;
    for (Forecaster* f : active) res.u_samples.push_back({f->name(), {}});

    // Raw actuals over the hold-out plus the leading prior interval.
    Eigen::ArrayXd alo(horizon + 1), aup(horizon + 1);
    for (Eigen::Index i = 0; i <= horizon; ++i) {
        alo[i] = raw.interval(split - 1 + i).lower;
        aup[i] = raw.interval(split - 1 + i).upper;
    }

    for (int rep = 0; rep < replications; ++rep) {
        std::uint64_t seed = base_seed + static_cast<std::uint64_t>(rep);
        for (size_t m = 0; m < active.size(); ++m) {
            Forecaster* f = active[m];
            f->begin_replication(seed);
            Eigen::ArrayXd flo(horizon), fup(horizon);
            for (Eigen::Index t = split; t < n; ++t) {
                IntervalSeries history = series.prefix(t);
                bool repaired = false;
                Interval pred = repair_interval(f->forecast(history), true, &repaired);
                if (repaired) ++res.repair_count;
                flo[t - split] = pred.lower;
                fup[t - split] = pred.upper;
                res.records.push_back({rep, f->name(), series.period(t), pred,
                                       raw.interval(t), repaired});
            }
            res.u_samples[m].values.push_back(theil_u_interval(alo, aup, flo, fup));
        }
    }

    std::sort(res.records.begin(), res.records.end(),
              [](const ForecastRecord& a, const ForecastRecord& b) {
                  if (a.replication != b.replication) return a.replication < b.replication;
                  if (!(a.period == b.period)) return a.period < b.period;
                  return a.model < b.model;
              });
    return res;
}

}  // namespace itsf
