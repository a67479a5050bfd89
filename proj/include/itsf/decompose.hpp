#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "itsf/errors.hpp"

namespace itsf {

struct SiftConfig {
    int num_directions = 64;      // M, at least 4 and divisible by 4
    int max_sift_iterations = 100;
    double sd_threshold = 0.04;   // Cauchy-style stopping criterion
    int max_imfs = 0;             // 0 = no cap

    void validate() const;
};

template <typename Scalar>
struct Decomposition {
    std::vector<Eigen::Array<Scalar, Eigen::Dynamic, 1>> imfs;
    Eigen::Array<Scalar, Eigen::Dynamic, 1> residual;
    std::vector<int> sift_counts;

    Eigen::Array<Scalar, Eigen::Dynamic, 1> reconstruct() const {
        auto sum = residual;
        for (const auto& imf : imfs) sum += imf;
        return sum;
    }
};

using ComplexDecomposition = Decomposition<std::complex<double>>;
using RealDecomposition = Decomposition<double>;

// Signal projected onto direction phi: Re(e^{-i phi} c).
Eigen::ArrayXd project(const Eigen::ArrayXcd& samples, double phi);

// Indices t with p[t-1] < p[t] and p[t] >= p[t+1]. Endpoints are never
// maxima; a plateau yields its first index. Throws DataError when the
// series is too short to have an interior point.
std::vector<Eigen::Index> find_local_maxima(const Eigen::ArrayXd& p);

// Spline through the complex samples at the maxima of the projection onto
// phi, with two mirrored knots appended at each end to tame end swings.
// Throws InsufficientExtremaError with fewer than two maxima.
Eigen::ArrayXcd direction_envelope(const Eigen::ArrayXcd& samples, double phi);

// Average of the direction envelopes over phi_m = 2 pi m / M, m = 1..M.
Eigen::ArrayXcd mean_envelope(const Eigen::ArrayXcd& samples, const SiftConfig& cfg);

struct SiftResult {
    Eigen::ArrayXcd imf;
    int iterations = 0;
    bool converged = false;
};

// Repeated envelope subtraction until the normalized step change drops
// below sd_threshold. Stops early if some direction loses its extrema.
SiftResult sift(const Eigen::ArrayXcd& samples, const SiftConfig& cfg);

ComplexDecomposition bemd_decompose(const Eigen::ArrayXcd& samples, const SiftConfig& cfg);

// Classical envelope-pair variant for one real-valued series.
RealDecomposition emd_decompose(const Eigen::ArrayXd& samples, const SiftConfig& cfg);

// Long-format dump: t,component,part,value with component imf1..imfN or
// residual and part re|im.
void write_decomposition_csv(const ComplexDecomposition& d, std::ostream& out);

}  // namespace itsf
