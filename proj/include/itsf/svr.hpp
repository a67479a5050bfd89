#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "itsf/errors.hpp"

namespace itsf {

enum class KernelKind { Linear, Rbf };

struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    double gamma = 1.0;  // rbf only: k(u,v) = exp(-gamma |u-v|^2)
};

struct SvrHyper {
    double cost = 1.0;     // box constraint C > 0
    double epsilon = 0.1;  // insensitive tube half-width, >= 0
    KernelSpec kernel;
};

// Epsilon-insensitive support vector regression, f(x) = sum beta_i k(x_i, x) + b.
// Inputs are standardized internally; the model keeps the feature scaler.
struct SvrModel {
    SvrHyper hyper;
    Eigen::MatrixXd support_inputs;  // rows, already standardized
    Eigen::VectorXd dual_coefs;      // beta at the support rows
    double bias = 0.0;
    Eigen::VectorXd feat_mean;
    Eigen::VectorXd feat_std;

    double predict(const Eigen::VectorXd& x) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

struct TrainInfo {
    int iterations = 0;
    std::vector<double> dual_objective;  // one entry per working-set step
};

// Dual solved by sequential minimal optimization with maximal-violating-pair
// selection; stops when the KKT gap drops to 1e-4.
SvrModel svr_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrHyper& hyper,
                   TrainInfo* info = nullptr);

struct CvResult {
    SvrHyper best;
    int best_index = 0;
    Eigen::VectorXd scores;  // mean fold RMSE per grid entry
};

// K-fold cross validation over an explicit hyperparameter grid. Rows are
// shuffled once with the given seed, folds are contiguous in the shuffled
// order, and ties keep the earliest grid entry.
CvResult svr_grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const std::vector<SvrHyper>& grid, int folds, std::uint64_t seed);

// Exponential default grids: cost 2^-4..2^10, epsilon 2^-8..2^-1,
// gamma 2^-6..2^4, all stepping x4.
std::vector<SvrHyper> default_rbf_grid();
std::vector<SvrHyper> default_linear_grid();

void save_svr_model(const SvrModel& m, std::ostream& out);
SvrModel load_svr_model(std::istream& in);

}  // namespace itsf
