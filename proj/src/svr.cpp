#include "itsf/svr.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "itsf/format.hpp"

namespace itsf {

namespace {

void validate_hyper(const SvrHyper& h) {
    if (!(h.cost > 0.0)) throw DataError("svr: cost must be positive");
    if (h.epsilon < 0.0) throw DataError("svr: epsilon must be >= 0");
    if (h.kernel.kind == KernelKind::Rbf && !(h.kernel.gamma > 0.0))
        throw DataError("svr: gamma must be positive");
}

struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;

    static Scaler fit(const Eigen::MatrixXd& X) {
        Scaler s;
        s.mean = X.colwise().mean();
        Eigen::MatrixXd centered = X.rowwise() - s.mean.transpose();
        s.std = (centered.array().square().colwise().mean()).sqrt();
        for (Eigen::Index j = 0; j < s.std.size(); ++j)
            if (s.std[j] <= 0.0) s.std[j] = 1.0;  // constant feature
        return s;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
        return (X.rowwise() - mean.transpose()).array().rowwise() /
               std.transpose().array();
    }
};

Eigen::MatrixXd cross_sqdist(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::VectorXd an = A.rowwise().squaredNorm();
    Eigen::VectorXd bn = B.rowwise().squaredNorm();
    Eigen::MatrixXd d = -2.0 * A * B.transpose();
    d.colwise() += an;
    d.rowwise() += bn.transpose();
    return d.cwiseMax(0.0);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const KernelSpec& k) {
    if (k.kind == KernelKind::Linear) return A * B.transpose();
    return (-k.gamma * cross_sqdist(A, B).array()).exp();
}

struct DualSolution {
    Eigen::VectorXd beta;
    double bias = 0.0;
    int iterations = 0;
};

// Stop once the worst KKT violation is this small. Well below the 1e-3
// slop the rest of the code assumes, so solutions are interchangeable with
// a fully converged reference at that scale; much tighter and the badly
// conditioned linear duals stop converging in tolerable time.
constexpr double kKktGap = 1e-4;
constexpr long kMaxSmoIterations = 50'000'000;

// SMO on the 2n-variable dual in theta = (alpha; alpha_star) with
// z = (1; -1). Each step picks the maximal violating pair across the two
// blocks and moves it as far as the box allows. The working state is kept
// in beta = alpha - alpha_star and u = K beta; the per-point gradients are
//   plus block:  u_i + eps - y_i      (slope of the objective in alpha_i)
//   minus block: -u_i + eps + y_i.
DualSolution solve_smo(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C, double eps,
                       TrainInfo* info) {
    const Eigen::Index n = y.size();
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd astar = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    double sum_a = 0.0;

    auto objective = [&]() {
        Eigen::VectorXd beta = alpha - astar;
        return -0.5 * beta.dot(u) - eps * sum_a + y.dot(beta);
    };

    double v_up = 0.0, v_low = 0.0;
    long iter = 0;
    for (; iter < kMaxSmoIterations; ++iter) {
        // Maximal violating pair over both blocks.
        v_up = -std::numeric_limits<double>::infinity();
        v_low = std::numeric_limits<double>::infinity();
        Eigen::Index i_up = -1, i_low = -1;
        bool up_plus = true, low_plus = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double gp = u[i] + eps - y[i];
            double gm = -u[i] + eps + y[i];
            if (alpha[i] < C && -gp > v_up) { v_up = -gp; i_up = i; up_plus = true; }
            if (astar[i] > 0.0 && gm > v_up) { v_up = gm; i_up = i; up_plus = false; }
            if (alpha[i] > 0.0 && -gp < v_low) { v_low = -gp; i_low = i; low_plus = true; }
            if (astar[i] < C && gm < v_low) { v_low = gm; i_low = i; low_plus = false; }
        }
        double gap = v_up - v_low;
        if (gap <= kKktGap || i_up < 0 || i_low < 0) break;

        // Unconstrained step along (+z_up, -z_low), then clip to the box.
        double a = K(i_up, i_up) + K(i_low, i_low) - 2.0 * K(i_up, i_low);
        double t = a > 1e-12 ? gap / a : std::numeric_limits<double>::infinity();
        t = std::min(t, up_plus ? C - alpha[i_up] : astar[i_up]);
        t = std::min(t, low_plus ? alpha[i_low] : C - astar[i_low]);

        if (up_plus) { alpha[i_up] += t; sum_a += t; } else { astar[i_up] -= t; sum_a -= t; }
        if (low_plus) { alpha[i_low] -= t; sum_a -= t; } else { astar[i_low] += t; sum_a += t; }
        u += t * (K.col(i_up) - K.col(i_low));

        if (info) info->dual_objective.push_back(objective());
    }
    if (iter >= kMaxSmoIterations)
        throw NumericalError("svr: SMO failed to reach the KKT gap");

    DualSolution sol;
    sol.beta = alpha - astar;
    sol.iterations = static_cast<int>(iter);
    if (info) info->iterations = static_cast<int>(iter);

    // Bias from free support vectors; midpoint of the KKT bracket otherwise.
    double bias_sum = 0.0;
    int bias_count = 0;
    const double lo = 1e-8 * C, hi = C * (1.0 - 1e-8);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (alpha[i] > lo && alpha[i] < hi) { bias_sum += y[i] - u[i] - eps; ++bias_count; }
        if (astar[i] > lo && astar[i] < hi) { bias_sum += y[i] - u[i] + eps; ++bias_count; }
    }
    if (bias_count > 0) {
        sol.bias = bias_sum / bias_count;
    } else {
        // Every multiplier sits on a box corner, so optimality only pins the
        // bias to an interval. Build that interval treating anything past the
        // snap thresholds as exactly on its corner: comparing against the
        // bounds exactly would flip on the 1e-16 rounding the clipped updates
        // leave behind and shift the midpoint by a visible fraction of the
        // interval width.
        double b_lo = -std::numeric_limits<double>::infinity();
        double b_hi = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (alpha[i] < hi)
                b_lo = std::max(b_lo, y[i] - u[i] - eps);
            else
                b_hi = std::min(b_hi, y[i] - u[i] - eps);
            if (astar[i] < hi)
                b_hi = std::min(b_hi, y[i] - u[i] + eps);
            else
                b_lo = std::max(b_lo, y[i] - u[i] + eps);
        }
        sol.bias = 0.5 * (b_lo + b_hi);
    }
    return sol;
}

std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int k, std::uint64_t seed) {
    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<Eigen::Index>> folds(static_cast<size_t>(k));
    for (int f = 0; f < k; ++f) {
        size_t b = static_cast<size_t>(f) * static_cast<size_t>(n) / static_cast<size_t>(k);
        size_t e = static_cast<size_t>(f + 1) * static_cast<size_t>(n) / static_cast<size_t>(k);
        folds[static_cast<size_t>(f)].assign(order.begin() + b, order.begin() + e);
    }
    return folds;
}

}  // namespace

double SvrModel::predict(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd row = x.transpose();
    return predict(row)[0];
}

Eigen::VectorXd SvrModel::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != feat_mean.size())
        throw DataError("svr: feature width mismatch");
    Eigen::MatrixXd Xs = (X.rowwise() - feat_mean.transpose()).array().rowwise() /
                         feat_std.transpose().array();
    if (support_inputs.rows() == 0)
        return Eigen::VectorXd::Constant(X.rows(), bias);
    Eigen::MatrixXd K = kernel_matrix(Xs, support_inputs, hyper.kernel);
    return (K * dual_coefs).array() + bias;
}

SvrModel svr_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrHyper& hyper,
                   TrainInfo* info) {
    validate_hyper(hyper);
    if (X.rows() != y.size())
        throw DataError("svr: row/target count mismatch");
    if (X.rows() < 1)
        throw DataError("svr: empty training set");

    Scaler sc = Scaler::fit(X);
    Eigen::MatrixXd Xs = sc.apply(X);
    Eigen::MatrixXd K = kernel_matrix(Xs, Xs, hyper.kernel);
    DualSolution sol = solve_smo(K, y, hyper.cost, hyper.epsilon, info);

    SvrModel m;
    m.hyper = hyper;
    m.feat_mean = sc.mean;
    m.feat_std = sc.std;
    m.bias = sol.bias;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < sol.beta.size(); ++i)
        if (sol.beta[i] != 0.0) rows.push_back(i);
    m.support_inputs.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    m.dual_coefs.resize(static_cast<Eigen::Index>(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        m.support_inputs.row(static_cast<Eigen::Index>(r)) = Xs.row(rows[r]);
        m.dual_coefs[static_cast<Eigen::Index>(r)] = sol.beta[rows[r]];
    }
    return m;
}

CvResult svr_grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const std::vector<SvrHyper>& grid, int folds, std::uint64_t seed) {
    if (grid.empty()) throw DataError("svr: empty hyperparameter grid");
    for (const auto& h : grid) validate_hyper(h);
    if (folds < 2) throw DataError("svr: need at least 2 folds");
    const Eigen::Index n = X.rows();
    if (n < folds) throw DataError("svr: fewer rows than folds");
    if (n != y.size()) throw DataError("svr: row/target count mismatch");

    bool any_rbf = std::any_of(grid.begin(), grid.end(),
                               [](const SvrHyper& h) { return h.kernel.kind == KernelKind::Rbf; });
    bool any_lin = std::any_of(grid.begin(), grid.end(),
                               [](const SvrHyper& h) { return h.kernel.kind == KernelKind::Linear; });

    auto fold_idx = make_folds(n, folds, seed);
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));

    for (const auto& va : fold_idx) {
        std::vector<Eigen::Index> tr;
        tr.reserve(static_cast<size_t>(n) - va.size());
        for (const auto& f : fold_idx)
            if (&f != &va) tr.insert(tr.end(), f.begin(), f.end());

        Eigen::MatrixXd Xtr(static_cast<Eigen::Index>(tr.size()), X.cols());
        Eigen::VectorXd ytr(static_cast<Eigen::Index>(tr.size()));
        for (size_t r = 0; r < tr.size(); ++r) {
            Xtr.row(static_cast<Eigen::Index>(r)) = X.row(tr[r]);
            ytr[static_cast<Eigen::Index>(r)] = y[tr[r]];
        }
        Eigen::MatrixXd Xva(static_cast<Eigen::Index>(va.size()), X.cols());
        Eigen::VectorXd yva(static_cast<Eigen::Index>(va.size()));
        for (size_t r = 0; r < va.size(); ++r) {
            Xva.row(static_cast<Eigen::Index>(r)) = X.row(va[r]);
            yva[static_cast<Eigen::Index>(r)] = y[va[r]];
        }

        Scaler sc = Scaler::fit(Xtr);
        Eigen::MatrixXd Xts = sc.apply(Xtr);
        Eigen::MatrixXd Xvs = sc.apply(Xva);

        // Distance and inner-product caches shared across the grid.
        Eigen::MatrixXd Dtt, Dvt, Gtt, Gvt;
        if (any_rbf) { Dtt = cross_sqdist(Xts, Xts); Dvt = cross_sqdist(Xvs, Xts); }
        if (any_lin) { Gtt = Xts * Xts.transpose(); Gvt = Xvs * Xts.transpose(); }

        for (size_t g = 0; g < grid.size(); ++g) {
            const SvrHyper& h = grid[g];
            Eigen::MatrixXd K, Kva;
            if (h.kernel.kind == KernelKind::Rbf) {
                K = (-h.kernel.gamma * Dtt.array()).exp();
                Kva = (-h.kernel.gamma * Dvt.array()).exp();
            } else {
                K = Gtt;
                Kva = Gvt;
            }
            DualSolution sol = solve_smo(K, ytr, h.cost, h.epsilon, nullptr);
            Eigen::VectorXd pred = (Kva * sol.beta).array() + sol.bias;
            double rmse = std::sqrt((pred - yva).squaredNorm() / static_cast<double>(yva.size()));
            scores[static_cast<Eigen::Index>(g)] += rmse / static_cast<double>(folds);
        }
    }

    CvResult res;
    res.scores = scores;
    res.best_index = 0;
    for (Eigen::Index g = 1; g < scores.size(); ++g)
        if (scores[g] < scores[res.best_index]) res.best_index = static_cast<int>(g);
    res.best = grid[static_cast<size_t>(res.best_index)];
    return res;
}

namespace {

std::vector<double> pow2_range(int lo, int hi, int step) {
    std::vector<double> out;
    for (int e = lo; e <= hi; e += step) out.push_back(std::ldexp(1.0, e));
    return out;
}

}  // namespace

std::vector<SvrHyper> default_rbf_grid() {
    std::vector<SvrHyper> grid;
    for (double c : pow2_range(-4, 10, 2))
        for (double e : pow2_range(-8, -1, 2))
            for (double g : pow2_range(-6, 4, 2))
                grid.push_back({c, e, {KernelKind::Rbf, g}});
    return grid;
}

std::vector<SvrHyper> default_linear_grid() {
    std::vector<SvrHyper> grid;
    for (double c : pow2_range(-4, 10, 2))
        for (double e : pow2_range(-8, -1, 2))
            grid.push_back({c, e, {KernelKind::Linear, 1.0}});
    return grid;
}

void save_svr_model(const SvrModel& m, std::ostream& out) {
    out << "svr-model 1\n";
    out << "kernel " << (m.hyper.kernel.kind == KernelKind::Rbf ? "rbf" : "linear") << '\n';
    out << "gamma " << format_double(m.hyper.kernel.gamma) << '\n';
    out << "cost " << format_double(m.hyper.cost) << '\n';
    out << "epsilon " << format_double(m.hyper.epsilon) << '\n';
    out << "bias " << format_double(m.bias) << '\n';
    out << "features " << m.feat_mean.size() << '\n';
    out << "mean";
    for (Eigen::Index j = 0; j < m.feat_mean.size(); ++j) out << ' ' << format_double(m.feat_mean[j]);
    out << "\nstd";
    for (Eigen::Index j = 0; j < m.feat_std.size(); ++j) out << ' ' << format_double(m.feat_std[j]);
    out << "\nsupport " << m.support_inputs.rows() << '\n';
    for (Eigen::Index r = 0; r < m.support_inputs.rows(); ++r) {
        out << format_double(m.dual_coefs[r]);
        for (Eigen::Index j = 0; j < m.support_inputs.cols(); ++j)
            out << ' ' << format_double(m.support_inputs(r, j));
        out << '\n';
    }
    out << "end\n";
}

namespace {

std::string next_line(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("svr model: truncated");
    return line;
}

std::vector<std::string_view> split_spaces(std::string_view v) {
    std::vector<std::string_view> toks;
    size_t pos = 0;
    while (pos < v.size()) {
        size_t sp = v.find(' ', pos);
        if (sp == std::string_view::npos) sp = v.size();
        if (sp > pos) toks.push_back(v.substr(pos, sp - pos));
        pos = sp + 1;
    }
    return toks;
}

std::vector<std::string_view> expect_key(const std::string& line, std::string_view key) {
    auto toks = split_spaces(line);
    if (toks.empty() || toks[0] != key)
        throw DataError("svr model: expected '" + std::string(key) + "'");
    return toks;
}

}  // namespace

SvrModel load_svr_model(std::istream& in) {
    if (next_line(in) != "svr-model 1") throw DataError("svr model: bad header");
    SvrModel m;
    // The views returned by expect_key point into the line, so each line has
    // to outlive its views.
    std::string kern_line = next_line(in);
    auto kern = expect_key(kern_line, "kernel");
    if (kern.size() != 2) throw DataError("svr model: bad kernel line");
    if (kern[1] == "rbf") m.hyper.kernel.kind = KernelKind::Rbf;
    else if (kern[1] == "linear") m.hyper.kernel.kind = KernelKind::Linear;
    else throw DataError("svr model: unknown kernel");
    m.hyper.kernel.gamma = parse_double(expect_key(next_line(in), "gamma").at(1));
    m.hyper.cost = parse_double(expect_key(next_line(in), "cost").at(1));
    m.hyper.epsilon = parse_double(expect_key(next_line(in), "epsilon").at(1));
    m.bias = parse_double(expect_key(next_line(in), "bias").at(1));
    long d = parse_long(expect_key(next_line(in), "features").at(1));
    if (d < 1) throw DataError("svr model: bad feature count");
    std::string mean_line = next_line(in);
    auto mean = expect_key(mean_line, "mean");
    std::string sd_line = next_line(in);
    auto sd = expect_key(sd_line, "std");
    if (static_cast<long>(mean.size()) != d + 1 || static_cast<long>(sd.size()) != d + 1)
        throw DataError("svr model: scaler width mismatch");
    m.feat_mean.resize(d);
    m.feat_std.resize(d);
    for (long j = 0; j < d; ++j) {
        m.feat_mean[j] = parse_double(mean[static_cast<size_t>(j + 1)]);
        m.feat_std[j] = parse_double(sd[static_cast<size_t>(j + 1)]);
    }
    long rows = parse_long(expect_key(next_line(in), "support").at(1));
    if (rows < 0) throw DataError("svr model: bad support count");
    m.support_inputs.resize(rows, d);
    m.dual_coefs.resize(rows);
    for (long r = 0; r < rows; ++r) {
        std::string line = next_line(in);
        auto toks = split_spaces(line);
        if (static_cast<long>(toks.size()) != d + 1)
            throw DataError("svr model: bad support row");
        m.dual_coefs[r] = parse_double(toks[0]);
        for (long j = 0; j < d; ++j)
            m.support_inputs(r, j) = parse_double(toks[static_cast<size_t>(j + 1)]);
    }
    if (next_line(in) != "end") throw DataError("svr model: missing end");
    return m;
}

}  // namespace itsf
