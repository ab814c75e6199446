#pragma once

#include "e3dtv/tensor.hpp"

#include <array>
#include <memory>

namespace e3dtv {

/// Coefficients of the operator  identity * I + sum_n gradient[n] * D_n^* D_n.
struct SystemWeights {
    std::array<double, 3> gradient{1.0, 1.0, 1.0};
    double identity = 1.0;

    /// Denoising system: mu on every term.
    static SystemWeights uniform(double mu) { return {{mu, mu, mu}, mu}; }
};

/// Right-hand side of the X-subproblem together with the denominator field
/// T_x(i,j,k) = sum_n |FFT(difference kernel n)|^2 at frequency (i,j,k).
struct LinearSystemRhs {
    Matrix hx;
    HsiTensor tx;
};

/// Eigenvalue field of D_n^* D_n for one mode: 2 - 2 cos(2 pi f / N) along
/// that mode's axis, constant along the others.
[[nodiscard]] HsiTensor mode_eigenvalues(Dims dims, int mode_idx);

/// Eigenvalue field of sum_n D_n^* D_n. Entries lie in [0, 12]; the DC
/// entry is zero.
[[nodiscard]] HsiTensor build_fft_denominator(Dims dims);

/// Solves (mu I + mu sum_n D_n^* D_n) X = H_x by pointwise division in the
/// Fourier domain, using the supplied T_x. Throws on mu <= 0 or non-finite rhs.
[[nodiscard]] Matrix solve_x_system(const LinearSystemRhs& rhs, double mu);

/// Reusable FFT-diagonalized solver for the circulant system above with
/// arbitrary non-negative per-term weights. Holds the FFTW plans for one
/// cube shape; solve() is safe to call concurrently.
class SpectralSolver {
public:
    explicit SpectralSolver(Dims dims);
    ~SpectralSolver();
    SpectralSolver(SpectralSolver&&) noexcept;
    SpectralSolver& operator=(SpectralSolver&&) noexcept;
    SpectralSolver(const SpectralSolver&) = delete;
    SpectralSolver& operator=(const SpectralSolver&) = delete;

    [[nodiscard]] const Dims& dims() const;

    /// Requires weights.identity > 0 and gradient weights >= 0.
    [[nodiscard]] Matrix solve(const Matrix& rhs, const SystemWeights& weights) const;

    /// Divides by the explicit field `denominator` (h x w x s, frequency
    /// indexed like the cube). Every entry must be > 0.
    [[nodiscard]] Matrix solve(const Matrix& rhs, const HsiTensor& denominator) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace e3dtv
