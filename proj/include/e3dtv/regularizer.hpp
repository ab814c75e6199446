#pragma once

#include "e3dtv/tensor.hpp"

#include <stdexcept>

namespace e3dtv {

/// Low-rank factorization G = U V^T of one gradient map, V column-orthonormal.
/// U (hw x r) holds the basis gradient maps, V (s x r) the band-mixing
/// coefficients.
struct FactorPair {
    Matrix u;
    Matrix v;

    [[nodiscard]] Index rank() const { return v.cols(); }

    /// Checks shapes and V^T V = I to `tol`. Throws std::invalid_argument.
    void validate(double tol = 1e-10) const;
};

class InfeasibleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Proximal map of delta * |.|: shrinks every entry toward zero by delta.
[[nodiscard]] double soft_threshold(double x, double delta);
[[nodiscard]] Matrix soft_threshold(const Matrix& x, double delta);

/// Column-orthonormal V minimizing ||u V^T - w||_F, i.e. maximizing
/// <w^T u, V>. With w^T u = B D C^T (thin SVD), V = B C^T.
///
/// Singular vectors are sign-normalized (largest-magnitude entry of each
/// column of B non-negative) so the result is deterministic.
/// Throws std::invalid_argument on shape mismatch or u == 0, and
/// std::domain_error on non-finite input.
[[nodiscard]] Matrix procrustes_v(const Matrix& w, const Matrix& u);

/// Anisotropic 3DTV: sum over the three circular gradient maps of their l1 norm.
[[nodiscard]] double tv3d_measure(const HsiTensor& x);

/// Enhanced-TV sparsity of one gradient map:
///   min ||U||_1  s.t.  G = U V^T, V^T V = I_r.
///
/// Every feasible V spans the row space of G plus an arbitrary complement,
/// and ||G V||_1 only depends on the rotation applied to the row-space
/// basis. The rotation is found by Givens coordinate descent with dense
/// angle scans, which is exact for r <= 2 up to the scan resolution and a
/// local optimum otherwise. The result never exceeds ||G V_svd||_1 for the
/// leading r right singular vectors V_svd.
///
/// Throws InfeasibleError when rank(G) > r.
[[nodiscard]] double etv_measure(const Matrix& g, Index r);

/// Numerical rank of `m`, singular values below rel_tol * sigma_max dropped.
[[nodiscard]] Index numerical_rank(const Matrix& m, double rel_tol = 1e-10);

struct EquivalenceReport {
    bool feasible_sets_agree = false;  ///< every candidate V is feasible for both forms or neither
    bool norm_chain_holds = false;     ///< ||G||^2 - ||GV||^2 == ||G - GVV^T||^2 on every candidate
    bool minima_agree = false;         ///< min over each feasible set coincides
    double min_norm_form = 0.0;        ///< min ||GV||_1 s.t. ||GV||_F = ||G||_F
    double min_factor_form = 0.0;      ///< min ||U||_1 s.t. G = U V^T
    Index candidates = 0;
    Index feasible = 0;

    [[nodiscard]] bool ok() const { return feasible_sets_agree && norm_chain_holds && minima_agree; }
};

/// Brute-force check that the norm-constrained and factor-constrained forms
/// of the enhanced-TV measure are the same problem, on a grid of the feasible
/// Stiefel family plus random Stiefel samples. Only small instances are
/// accepted (hw <= 12, s <= 4, r <= 2, r < s); larger ones throw
/// std::invalid_argument.
[[nodiscard]] EquivalenceReport check_equivalence(const Matrix& g, Index r, double tol = 1e-8,
                                                  unsigned long long seed = 7);

[[nodiscard]] inline bool equivalence_oracle(const Matrix& g, Index r, double tol = 1e-8) {
    return check_equivalence(g, r, tol).ok();
}

}  // namespace e3dtv
