#pragma once

#include "e3dtv/difference.hpp"
#include "e3dtv/errors.hpp"
#include "e3dtv/regularizer.hpp"
#include "e3dtv/spectral_solver.hpp"
#include "e3dtv/tensor.hpp"

#include <array>
#include <vector>

namespace e3dtv {

/// Tunables of the ADMM denoiser.
///
/// The model is  min tau * sum_n ||U_n||_1 + lambda * ||E||_1
///   s.t. Y = X + E,  D_n X = U_n V_n^T,  V_n^T V_n = I.
/// U is shrunk by tau/mu and E by lambda/mu each iteration.
struct SolverConfig {
    double tau = 0.0;
    double lambda = 0.0;
    Index rank = 0;
    double mu0 = 1e-2;
    double mu_growth = 1.05;
    double mu_max = 1e6;
    double eps1 = 1e-6;  ///< bound on ||Y - X - E||_F^2 / ||Y||_F^2
    double eps2 = 1e-6;  ///< bound on ||D_n X - U_n V_n^T||_F^2 / ||Y||_F^2
    int max_iters = 200;
    /// Plain 3DTV: rank = s, V_n pinned to the identity, no V updates.
    bool baseline_3dtv = false;
    int threads = 1;

    /// lambda = 1/sqrt(hw), tau = c * sqrt(hw).
    static SolverConfig with_defaults(Dims dims, double c, Index rank);

    /// Throws ConfigError. `bands` is s of the input cube.
    void validate(Index bands) const;

    /// Rank actually used for a cube with `bands` bands.
    [[nodiscard]] Index effective_rank(Index bands) const { return baseline_3dtv ? bands : rank; }
};

struct SolverReport {
    int iterations = 0;
    bool converged = false;
    std::vector<double> fidelity_residual;  ///< per iteration
    std::vector<double> gradient_residual;  ///< per iteration, max over modes
    std::vector<double> objective;
    std::vector<double> mu;
    double wall_seconds = 0.0;
};

struct DenoiseState {
    Matrix x;
    Matrix e;
    std::array<FactorPair, 3> factors;
    std::array<Matrix, 3> multipliers;
    Matrix gamma;
    double mu = 0.0;
};

struct DenoiseResult {
    HsiTensor x;
    HsiTensor e;
    SolverReport report;
};

/// X = Y, E = 0, V_n = leading right singular vectors of D_n Y, U_n = D_n Y V_n,
/// multipliers zero, mu = mu0.
[[nodiscard]] DenoiseState initial_state(const Matrix& y, Dims dims, const SolverConfig& cfg);

/// Solves (mu I + mu sum D_n^* D_n) X = mu(Y - E) + Gamma + sum D_n^*(mu U_n V_n^T - M_n).
[[nodiscard]] Matrix update_x(const DenoiseState& st, const Matrix& y, const SpectralSolver& solver);

/// E = S_{lambda/mu}(Y - X + Gamma/mu).
[[nodiscard]] Matrix update_e(const Matrix& y, const Matrix& x, const Matrix& gamma, double mu, double lambda);

/// U = S_{tau/mu}((D_n X + M_n/mu) V_n).
[[nodiscard]] Matrix update_u(const Matrix& grad_x, const Matrix& multiplier, const Matrix& v, double mu,
                              double tau);

/// Procrustes update on W = D_n X + M_n/mu. A zero U keeps the previous V.
[[nodiscard]] Matrix update_v(const Matrix& grad_x, const Matrix& multiplier, const Matrix& u,
                              const Matrix& previous_v, double mu);

/// M_n += mu (D_n X - U_n V_n^T), Gamma += mu (Y - X - E), then mu grows.
void update_multipliers(DenoiseState& st, const Matrix& y, const std::array<Matrix, 3>& grad_x,
                        const SolverConfig& cfg);

/// Runs the full ADMM loop. Throws ConfigError before compute and
/// NumericalError if an iterate becomes non-finite.
[[nodiscard]] DenoiseResult denoise(const HsiTensor& y, const SolverConfig& cfg);

/// Leading r right singular vectors of g (s x r), sign-normalized.
[[nodiscard]] Matrix leading_right_singular_vectors(const Matrix& g, Index r);

}  // namespace e3dtv
