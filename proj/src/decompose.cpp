#include "itsf/decompose.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "itsf/format.hpp"
#include "itsf/spline.hpp"

namespace itsf {

void SiftConfig::validate() const {
    if (num_directions < 4 || num_directions % 4 != 0)
        throw DataError("num_directions must be >= 4 and divisible by 4");
    if (max_sift_iterations < 1)
        throw DataError("max_sift_iterations must be positive");
    if (!(sd_threshold > 0.0))
        throw DataError("sd_threshold must be positive");
    if (max_imfs < 0)
        throw DataError("max_imfs must be >= 0");
}

Eigen::ArrayXd project(const Eigen::ArrayXcd& samples, double phi) {
    return samples.real() * std::cos(phi) + samples.imag() * std::sin(phi);
}

namespace {

std::vector<Eigen::Index> maxima_nothrow(const Eigen::ArrayXd& p) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index t = 1; t + 1 < p.size(); ++t)
        if (p[t - 1] < p[t] && p[t] >= p[t + 1]) idx.push_back(t);
    return idx;
}

// Knots at the maxima plus two mirrored knots per side. Mirroring reflects
// the first and last two maxima about the series endpoints, which keeps the
// spline from swinging freely outside the observed extrema.
template <typename Scalar>
void mirror_knots(const std::vector<Eigen::Index>& idx,
                  const Eigen::Array<Scalar, Eigen::Dynamic, 1>& samples, Eigen::ArrayXd& t_out,
                  Eigen::Array<Scalar, Eigen::Dynamic, 1>& y_out) {
    const size_t k = idx.size();
    const double last = static_cast<double>(samples.size() - 1);
    t_out.resize(static_cast<Eigen::Index>(k) + 4);
    y_out.resize(static_cast<Eigen::Index>(k) + 4);
    t_out[0] = -static_cast<double>(idx[1]);
    y_out[0] = samples[idx[1]];
    t_out[1] = -static_cast<double>(idx[0]);
    y_out[1] = samples[idx[0]];
    for (size_t i = 0; i < k; ++i) {
        t_out[static_cast<Eigen::Index>(i) + 2] = static_cast<double>(idx[i]);
        y_out[static_cast<Eigen::Index>(i) + 2] = samples[idx[i]];
    }
    t_out[static_cast<Eigen::Index>(k) + 2] = 2.0 * last - static_cast<double>(idx[k - 1]);
    y_out[static_cast<Eigen::Index>(k) + 2] = samples[idx[k - 1]];
    t_out[static_cast<Eigen::Index>(k) + 3] = 2.0 * last - static_cast<double>(idx[k - 2]);
    y_out[static_cast<Eigen::Index>(k) + 3] = samples[idx[k - 2]];
}

template <typename Scalar>
bool try_envelope(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& samples,
                  const Eigen::ArrayXd& signal, const Eigen::ArrayXd& grid,
                  Eigen::Array<Scalar, Eigen::Dynamic, 1>& out) {
    auto idx = maxima_nothrow(signal);
    if (idx.size() < 2) return false;
    Eigen::ArrayXd t;
    Eigen::Array<Scalar, Eigen::Dynamic, 1> y;
    mirror_knots(idx, samples, t, y);
    out = natural_cubic_spline<Scalar>(t, y, grid);
    return true;
}

Eigen::ArrayXd sample_grid(Eigen::Index n) {
    return Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
}

bool try_mean_envelope(const Eigen::ArrayXcd& samples, const SiftConfig& cfg,
                       Eigen::ArrayXcd& out) {
    const Eigen::Index n = samples.size();
    if (n < 3) return false;
    const Eigen::ArrayXd grid = sample_grid(n);
    Eigen::ArrayXcd acc = Eigen::ArrayXcd::Zero(n);
    Eigen::ArrayXcd env(n);
    for (int m = 1; m <= cfg.num_directions; ++m) {
        double phi = 2.0 * std::numbers::pi * m / cfg.num_directions;
        Eigen::ArrayXd p = project(samples, phi);
        if (!try_envelope<std::complex<double>>(samples, p, grid, env)) return false;
        acc += env;
    }
    out = acc / static_cast<double>(cfg.num_directions);
    return true;
}

// Mean of the upper envelope (through maxima) and lower envelope (through
// minima, found as maxima of the negated series).
bool try_mean_envelope(const Eigen::ArrayXd& samples, const SiftConfig&, Eigen::ArrayXd& out) {
    const Eigen::Index n = samples.size();
    if (n < 3) return false;
    const Eigen::ArrayXd grid = sample_grid(n);
    Eigen::ArrayXd up(n), lo(n);
    if (!try_envelope<double>(samples, samples, grid, up)) return false;
    if (!try_envelope<double>(samples, -samples, grid, lo)) return false;
    out = (up + lo) / 2.0;
    return true;
}

template <typename Scalar>
struct BasicSiftResult {
    Eigen::Array<Scalar, Eigen::Dynamic, 1> imf;
    int iterations = 0;
    bool converged = false;
};

template <typename Scalar>
BasicSiftResult<Scalar> sift_core(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& samples,
                                  const SiftConfig& cfg) {
    BasicSiftResult<Scalar> res;
    res.imf = samples;
    Eigen::Array<Scalar, Eigen::Dynamic, 1> env;
    for (int k = 1; k <= cfg.max_sift_iterations; ++k) {
        if (!try_mean_envelope(res.imf, cfg, env)) return res;  // ran out of extrema
        Eigen::Array<Scalar, Eigen::Dynamic, 1> next = res.imf - env;
        double num = (next - res.imf).abs2().sum();
        double den = res.imf.abs2().sum();
        double sd = den > 0.0 ? num / den : 0.0;
        res.imf = std::move(next);
        res.iterations = k;
        if (sd < cfg.sd_threshold) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

bool can_extract(const Eigen::ArrayXcd& samples, const SiftConfig& cfg) {
    if (samples.size() < 3) return false;
    for (int m = 1; m <= cfg.num_directions; ++m) {
        double phi = 2.0 * std::numbers::pi * m / cfg.num_directions;
        if (maxima_nothrow(project(samples, phi)).size() >= 2) return true;
    }
    return false;
}

bool can_extract(const Eigen::ArrayXd& samples, const SiftConfig&) {
    if (samples.size() < 3) return false;
    return maxima_nothrow(samples).size() >= 2 && maxima_nothrow(-samples).size() >= 2;
}

// Extraction stops once the remainder's peak magnitude falls below this
// fraction of the input's. Envelope splines leave sub-percent ripple behind
// every subtraction, and without a floor that ripple gets chopped into
// meaningless extra components (a pure tone, for one, must come out as a
// single component).
constexpr double kNegligibleResidueRatio = 0.05;

template <typename Scalar>
Decomposition<Scalar> decompose_core(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& samples,
                                     const SiftConfig& cfg) {
    cfg.validate();
    if (samples.size() < 3)
        throw DataError("decomposition needs at least 3 samples");
    Decomposition<Scalar> d;
    d.residual = samples;
    const double residue_floor = kNegligibleResidueRatio * samples.abs().maxCoeff();
    while (cfg.max_imfs == 0 || static_cast<int>(d.imfs.size()) < cfg.max_imfs) {
        if (d.residual.abs().maxCoeff() <= residue_floor) break;
        if (!can_extract(d.residual, cfg)) break;
        auto s = sift_core<Scalar>(d.residual, cfg);
        if (s.iterations == 0) break;  // envelope failed before any subtraction
        d.residual -= s.imf;
        d.imfs.push_back(std::move(s.imf));
        d.sift_counts.push_back(s.iterations);
    }
    return d;
}

}  // namespace

std::vector<Eigen::Index> find_local_maxima(const Eigen::ArrayXd& p) {
    if (p.size() < 3)
        throw DataError("find_local_maxima: series too short");
    return maxima_nothrow(p);
}

Eigen::ArrayXcd direction_envelope(const Eigen::ArrayXcd& samples, double phi) {
    if (samples.size() < 3)
        throw InsufficientExtremaError("envelope: series too short");
    Eigen::ArrayXcd env;
    if (!try_envelope<std::complex<double>>(samples, project(samples, phi),
                                            sample_grid(samples.size()), env))
        throw InsufficientExtremaError("envelope: fewer than 2 maxima along direction");
    return env;
}

Eigen::ArrayXcd mean_envelope(const Eigen::ArrayXcd& samples, const SiftConfig& cfg) {
    cfg.validate();
    Eigen::ArrayXcd out;
    if (!try_mean_envelope(samples, cfg, out))
        throw InsufficientExtremaError("mean envelope: some direction lacks extrema");
    return out;
}

SiftResult sift(const Eigen::ArrayXcd& samples, const SiftConfig& cfg) {
    cfg.validate();
    auto res = sift_core<std::complex<double>>(samples, cfg);
    return {std::move(res.imf), res.iterations, res.converged};
}

ComplexDecomposition bemd_decompose(const Eigen::ArrayXcd& samples, const SiftConfig& cfg) {
    return decompose_core<std::complex<double>>(samples, cfg);
}

RealDecomposition emd_decompose(const Eigen::ArrayXd& samples, const SiftConfig& cfg) {
    return decompose_core<double>(samples, cfg);
}

void write_decomposition_csv(const ComplexDecomposition& d, std::ostream& out) {
    out << "t,component,part,value\n";
    auto dump = [&](const Eigen::ArrayXcd& comp, const std::string& name) {
        for (Eigen::Index t = 0; t < comp.size(); ++t) {
            out << t << ',' << name << ",re," << format_double(comp[t].real()) << '\n';
            out << t << ',' << name << ",im," << format_double(comp[t].imag()) << '\n';
        }
    };
    for (size_t i = 0; i < d.imfs.size(); ++i) dump(d.imfs[i], "imf" + std::to_string(i + 1));
    dump(d.residual, "residual");
}

}  // namespace itsf
