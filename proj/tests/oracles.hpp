#pragma once

// Reference computations used only by the tests. Nothing here calls the
// library routine it is used to check.

#include "e3dtv/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>

namespace e3dtv::oracle {

inline Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = n01(rng);
    return m;
}

inline Vector gaussian_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = n01(rng);
    return v;
}

/// Column-orthonormal s x r matrix from the QR of a Gaussian matrix.
inline Matrix random_orthonormal(Index s, Index r, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(s, r, rng));
    return qr.householderQ() * Matrix::Identity(s, r);
}

/// Flat index of voxel (i, j, k), written out independently of HsiTensor.
inline Index voxel(Dims d, Index i, Index j, Index k) { return i + d.h * j + d.h * d.w * k; }

/// Dense N x N matrix of the forward circular difference along `mode`
/// (1, 2 or 3), built entry by entry from G(p) = X(p) - X(p + e_mode).
inline Matrix dense_difference(Dims d, int mode) {
    const Index n = d.size();
    Matrix D = Matrix::Zero(n, n);
    for (Index k = 0; k < d.s; ++k)
        for (Index j = 0; j < d.w; ++j)
            for (Index i = 0; i < d.h; ++i) {
                const Index p = voxel(d, i, j, k);
                Index q = 0;
                if (mode == 1) q = voxel(d, (i + 1) % d.h, j, k);
                if (mode == 2) q = voxel(d, i, (j + 1) % d.w, k);
                if (mode == 3) q = voxel(d, i, j, (k + 1) % d.s);
                D(p, p) += 1.0;
                D(p, q) -= 1.0;
            }
    return D;
}

/// Solves (w5 I + sum_n wn D_n^T D_n) x = b by dense LU.
inline Vector dense_system_solve(Dims d, const std::array<double, 3>& wgrad, double w5, const Vector& b) {
    Matrix A = w5 * Matrix::Identity(d.size(), d.size());
    for (int n = 0; n < 3; ++n) {
        const Matrix D = dense_difference(d, n + 1);
        A += wgrad[static_cast<std::size_t>(n)] * D.transpose() * D;
    }
    return A.partialPivLu().solve(b);
}

/// argmin_u  weight*|u| + (curvature/2)(u - x)^2 by a dense grid over
/// [x - span, x + span] with the given step.
inline double prox_grid_search(double x, double weight, double curvature, double span, double step) {
    double best_u = x, best_f = weight * std::abs(x);
    for (double u = x - span; u <= x + span; u += step) {
        const double f = weight * std::abs(u) + 0.5 * curvature * (u - x) * (u - x);
        if (f < best_f) {
            best_f = f;
            best_u = u;
        }
    }
    // The minimizer may be exactly zero (dead zone).
    const double f0 = 0.5 * curvature * x * x;
    if (f0 <= best_f) best_u = 0.0;
    return best_u;
}

}  // namespace e3dtv::oracle
