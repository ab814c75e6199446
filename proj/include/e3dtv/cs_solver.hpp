#pragma once

#include "e3dtv/cg.hpp"
#include "e3dtv/compressive_operator.hpp"
#include "e3dtv/denoise.hpp"

#include <array>
#include <vector>

namespace e3dtv {

/// Tunables of the compressed-sensing reconstruction
///   min tau * sum_n ||U_n||_1 + 1/2 ||E||_F^2
///   s.t. y = Psi(Z), Z = X + E, D_n X = U_n V_n^T, V_n^T V_n = I.
///
/// The gradient and coupling penalties share one schedule mu; the
/// measurement penalty is mu4_factor * mu.
struct CsConfig {
    double tau = 0.015;
    Index rank = 7;
    double mu0 = 1e-2;
    double mu_growth = 1.05;
    double mu_max = 1e6;
    double mu4_factor = 10.0;
    double eps1 = 1e-5;  ///< bound on ||y - Psi(Z)|| / ||y||
    double eps2 = 1e-6;  ///< bound on ||D_n X - U_n V_n^T||^2 / ||y||^2 and ||Z - X - E||^2 / ||y||^2
    int max_iters = 200;
    double cg_tol = 1e-8;
    int cg_max_iters = 500;
    /// Plain 3DTV: rank = s, V_n pinned to the identity, no V updates.
    bool baseline_3dtv = false;
    int threads = 1;

    /// Rank and tau by sampling ratio: r = 5, tau = 0.0075 up to 1%;
    /// r = 7, tau = 0.015 from 5% on. Rank is capped at s - 1.
    static CsConfig for_ratio(double ratio, Index bands);

    void validate(Index bands) const;

    [[nodiscard]] Index effective_rank(Index bands) const { return baseline_3dtv ? bands : rank; }
};

struct CsState {
    Matrix z;
    Matrix x;
    Matrix e;
    std::array<FactorPair, 3> factors;
    std::array<Matrix, 3> multipliers;
    Vector gamma1;
    Matrix gamma2;
    std::array<double, 5> mu{};  ///< mu_1..mu_3 gradient, mu_4 measurement, mu_5 coupling

    void set_penalty(double base, double mu4_factor) { mu = {base, base, base, mu4_factor * base, base}; }
};

struct CsResult {
    HsiTensor z;  ///< reconstruction
    HsiTensor x;  ///< its regularized component
    SolverReport report;
    std::vector<int> cg_iterations;  ///< per outer iteration
};

/// Z = Psi^* y, X = Z, E = 0, V_n from the leading right singular vectors of
/// D_n X, U_n = D_n X V_n, multipliers zero.
[[nodiscard]] CsState initial_cs_state(const Vector& y, const CompressiveOperator& op, const CsConfig& cfg);

/// Solves (mu4 Psi^* Psi + mu5 I) Z = mu5 (X + E) + mu4 Psi^* y + Psi^* Gamma1 - Gamma2
/// by CG, warm-started from the current Z. Throws NumericalError if CG does
/// not reach cfg.cg_tol within cfg.cg_max_iters.
[[nodiscard]] Matrix solve_z(const CsState& st, const Vector& y, const CompressiveOperator& op, const CsConfig& cfg,
                             CgResult* info = nullptr);

/// Solves (sum mu_n D_n^* D_n + mu5 I) X = mu5 (Z - E) + Gamma2 + sum D_n^*(mu_n U_n V_n^T - M_n).
[[nodiscard]] Matrix update_cs_x(const CsState& st, const SpectralSolver& solver);

/// E = (mu5 (Z - X) + Gamma2) / (1 + mu5).
[[nodiscard]] Matrix update_cs_e(const CsState& st);

/// Runs the full ADMM loop on measurements y.
[[nodiscard]] CsResult reconstruct(const Vector& y, const CompressiveOperator& op, const CsConfig& cfg);

}  // namespace e3dtv
