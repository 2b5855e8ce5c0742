#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace skelgest {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Least-squares smoothing coefficients for a degree-`order` polynomial fit
/// over `m` equally spaced points, evaluated at the centre point.
///
/// With the Vandermonde matrix A (m x (order+1), rows i^k for i = -h..h),
/// the smoothed centre value is e0^T (A^T A)^-1 A^T y, so the coefficients
/// are row 0 of the least-squares solution operator. Solved by QR rather
/// than by forming the normal equations.
template <typename Scalar = double>
VectorX<Scalar> savgol_coefficients(int m, int order) {
    if (m < 1 || m % 2 == 0 || order < 0 || order >= m) {
        throw std::invalid_argument("savgol: need odd m > order >= 0, got m=" + std::to_string(m) +
                                    ", order=" + std::to_string(order));
    }
    const int half = (m - 1) / 2;
    MatrixX<Scalar> vander(m, order + 1);
    for (int i = -half; i <= half; ++i) {
        Scalar p = 1;
        for (int k = 0; k <= order; ++k) {
            vander(i + half, k) = p;
            p *= static_cast<Scalar>(i);
        }
    }
    // Solve A X = I_m in the least-squares sense; row 0 of X maps samples to
    // the constant term of the fit, i.e. the value at the centre.
    const MatrixX<Scalar> solution =
        vander.colPivHouseholderQr().solve(MatrixX<Scalar>::Identity(m, m));
    VectorX<Scalar> coeffs = solution.row(0).transpose();
    // Symmetrize away rounding; the exact operator is symmetric.
    for (int i = 0; i < half; ++i) {
        const Scalar avg = (coeffs(i) + coeffs(m - 1 - i)) / 2;
        coeffs(i) = coeffs(m - 1 - i) = avg;
    }
    return coeffs;
}

/// Convolves `series` in place over interior points; the (m-1)/2 samples at
/// each end are passed through unchanged.
template <typename Derived>
void savgol_filter_inplace(Eigen::MatrixBase<Derived>& series,
                           const VectorX<typename Derived::Scalar>& coeffs) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index m = coeffs.size();
    const Eigen::Index half = (m - 1) / 2;
    const Eigen::Index n = series.size();
    if (n < m) return;
    const VectorX<Scalar> source = series;
    // Written as y_j + sum c_i (y_{j+i} - y_j) over symmetric pairs; equal to
    // the plain dot product because the coefficients sum to one, and leaves
    // constant and exactly linear samples bit-for-bit unchanged.
    for (Eigen::Index j = half; j < n - half; ++j) {
        Scalar acc = 0;
        for (Eigen::Index i = 1; i <= half; ++i)
            acc += coeffs(half + i) * ((source(j + i) - source(j)) + (source(j - i) - source(j)));
        series(j) = source(j) + acc;
    }
}

}  // namespace skelgest
