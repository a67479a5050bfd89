#pragma once

#include <algorithm>

#include <Eigen/Dense>

#include "itsf/errors.hpp"

namespace itsf {

// Natural cubic spline through (knot_t[i], knot_y[i]) evaluated at eval_t.
// Second derivatives vanish at the end knots; two knots degenerate to a
// straight line. Knot times must be strictly increasing. Scalar may be
// double or std::complex<double>: the tridiagonal moment system has real
// coefficients, so complex ordinates interpolate componentwise.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> natural_cubic_spline(
    const Eigen::ArrayXd& knot_t, const Eigen::Array<Scalar, Eigen::Dynamic, 1>& knot_y,
    const Eigen::ArrayXd& eval_t) {
    using Vec = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index k = knot_t.size();
    if (k != knot_y.size())
        throw DataError("spline: knot size mismatch");
    if (k < 2)
        throw DataError("spline: need at least 2 knots");
    for (Eigen::Index i = 1; i < k; ++i)
        if (!(knot_t[i] > knot_t[i - 1]))
            throw DataError("spline: knot times not strictly increasing");

    // Moments m[i] = S''(knot_t[i]); natural boundary m[0] = m[k-1] = 0.
    // Interior rows: h[i-1]/6 m[i-1] + (h[i-1]+h[i])/3 m[i] + h[i]/6 m[i+1]
    //              = (y[i+1]-y[i])/h[i] - (y[i]-y[i-1])/h[i-1].
    Vec m = Vec::Zero(k);
    if (k > 2) {
        const Eigen::Index n = k - 2;
        Eigen::ArrayXd diag(n), sub(n), sup(n);
        Vec rhs(n);
        for (Eigen::Index i = 1; i <= n; ++i) {
            double h0 = knot_t[i] - knot_t[i - 1];
            double h1 = knot_t[i + 1] - knot_t[i];
            sub[i - 1] = h0 / 6.0;
            diag[i - 1] = (h0 + h1) / 3.0;
            sup[i - 1] = h1 / 6.0;
            rhs[i - 1] = (knot_y[i + 1] - knot_y[i]) / h1 - (knot_y[i] - knot_y[i - 1]) / h0;
        }
        // Thomas algorithm; the system is diagonally dominant.
        for (Eigen::Index i = 1; i < n; ++i) {
            double w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m[n] = rhs[n - 1] / diag[n - 1];
        for (Eigen::Index i = n - 1; i >= 1; --i)
            m[i] = (rhs[i - 1] - sup[i - 1] * m[i + 1]) / diag[i - 1];
    }

    Vec out(eval_t.size());
    for (Eigen::Index j = 0; j < eval_t.size(); ++j) {
        double t = eval_t[j];
        // Segment lookup; evaluation outside the knot range continues the
        // polynomial of the nearest end segment.
        const double* begin = knot_t.data();
        const double* pos = std::upper_bound(begin + 1, begin + k - 1, t);
        Eigen::Index i = pos - begin - 1;
        double h = knot_t[i + 1] - knot_t[i];
        double u = (knot_t[i + 1] - t) / h;
        double v = (t - knot_t[i]) / h;
        out[j] = u * knot_y[i] + v * knot_y[i + 1] +
                 h * h / 6.0 * ((u * u * u - u) * m[i] + (v * v * v - v) * m[i + 1]);
    }
    return out;
}

}  // namespace itsf
