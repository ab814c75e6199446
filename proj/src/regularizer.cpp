#include "e3dtv/regularizer.hpp"

#include "e3dtv/difference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace e3dtv {

void FactorPair::validate(double tol) const {
    if (u.cols() != v.cols()) {
        throw std::invalid_argument("FactorPair: U has " + std::to_string(u.cols()) + " columns, V has " +
                                    std::to_string(v.cols()));
    }
    const Index r = v.cols();
    if (r < 1 || r >= v.rows() || r >= u.rows()) {
        throw std::invalid_argument("FactorPair: rank must satisfy 1 <= r < min(hw, s)");
    }
    const double err = (v.transpose() * v - Matrix::Identity(r, r)).cwiseAbs().maxCoeff();
    if (!(err <= tol)) {
        throw std::invalid_argument("FactorPair: V is not column-orthonormal (error " + std::to_string(err) + ")");
    }
}

double soft_threshold(double x, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("soft_threshold: delta must be positive");
    if (x > delta) return x - delta;
    if (x < -delta) return x + delta;
    return 0.0;
}

Matrix soft_threshold(const Matrix& x, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("soft_threshold: delta must be positive");
    return x.unaryExpr([delta](double v) {
        if (v > delta) return v - delta;
        if (v < -delta) return v + delta;
        return 0.0;
    });
}

Matrix procrustes_v(const Matrix& w, const Matrix& u) {
    if (w.rows() != u.rows()) {
        throw std::invalid_argument("procrustes_v: W and U must have the same number of rows");
    }
    if (u.cols() > w.cols()) {
        throw std::invalid_argument("procrustes_v: rank exceeds the number of bands");
    }
    require_finite(w, "procrustes_v(W)");
    require_finite(u, "procrustes_v(U)");
    if (u.squaredNorm() == 0.0) throw std::invalid_argument("procrustes_v: U is zero");

    const Matrix a = w.transpose() * u;  // s x r
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Matrix b = svd.matrixU();
    Matrix c = svd.matrixV();
    for (Index j = 0; j < b.cols(); ++j) {
        Index arg = 0;
        b.col(j).cwiseAbs().maxCoeff(&arg);
        if (b(arg, j) < 0.0) {
            b.col(j) *= -1.0;
            c.col(j) *= -1.0;
        }
    }
    return b * c.transpose();
}

double tv3d_measure(const HsiTensor& x) {
    double total = 0.0;
    for (Mode m : kModes) total += diff(x.unfolded(), x.dims(), m).cwiseAbs().sum();
    return total;
}

Index numerical_rank(const Matrix& m, double rel_tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    Index k = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_tol * sv(0)) ++k;
    return k;
}

namespace {

double rotated_pair_l1(const Matrix& a, Index p, Index q, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    double sum = 0.0;
    for (Index i = 0; i < a.rows(); ++i) {
        sum += std::abs(c * a(i, p) + s * a(i, q)) + std::abs(-s * a(i, p) + c * a(i, q));
    }
    return sum;
}

// Minimizes over theta in [0, pi/2); the pair l1 norm has that period.
double best_plane_angle(const Matrix& a, Index p, Index q) {
    constexpr int kScan = 1024;
    const double period = std::numbers::pi / 2.0;
    const double step = period / kScan;
    double best_theta = 0.0;
    double best = rotated_pair_l1(a, p, q, 0.0);
    for (int t = 1; t < kScan; ++t) {
        const double th = step * t;
        const double f = rotated_pair_l1(a, p, q, th);
        if (f < best) {
            best = f;
            best_theta = th;
        }
    }
    // Golden-section refinement inside the bracketing scan cell.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = best_theta - step, hi = best_theta + step;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = rotated_pair_l1(a, p, q, x1), f2 = rotated_pair_l1(a, p, q, x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = rotated_pair_l1(a, p, q, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = rotated_pair_l1(a, p, q, x2);
        }
    }
    const double refined = 0.5 * (lo + hi);
    return rotated_pair_l1(a, p, q, refined) < best ? refined : best_theta;
}

void rotate_columns(Matrix& a, Index p, Index q, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    const Vector cp = a.col(p), cq = a.col(q);
    a.col(p) = c * cp + s * cq;
    a.col(q) = -s * cp + c * cq;
}

double givens_descent(Matrix a) {
    double current = a.cwiseAbs().sum();
    for (int sweep = 0; sweep < 100; ++sweep) {
        const double before = current;
        for (Index p = 0; p < a.cols(); ++p) {
            for (Index q = p + 1; q < a.cols(); ++q) {
                const double th = best_plane_angle(a, p, q);
                if (th != 0.0) rotate_columns(a, p, q, th);
            }
        }
        current = a.cwiseAbs().sum();
        if (before - current <= 1e-14 * std::max(1.0, before)) break;
    }
    return current;
}

Matrix random_stiefel(Index s, Index r, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Matrix g(s, r);
    for (Index j = 0; j < r; ++j)
        for (Index i = 0; i < s; ++i) g(i, j) = n01(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(s, r);
}

}  // namespace

double etv_measure(const Matrix& g, Index r) {
    if (r < 1 || r > g.cols()) throw std::invalid_argument("etv_measure: rank must be in [1, s]");
    require_finite(g, "etv_measure");
    if (g.squaredNorm() == 0.0) return 0.0;

    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-10 * sv(0);
    Index k = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++k;
    if (k > r) {
        throw InfeasibleError("etv_measure: rank(G) = " + std::to_string(k) + " exceeds r = " + std::to_string(r));
    }

    // G [B_k, W] = [G B_k, ~0]; only the rotation of these r columns matters.
    const Matrix a = g * svd.matrixV().leftCols(r);
    if (r == 1) return a.cwiseAbs().sum();

    double best = givens_descent(a);
    std::mt19937_64 rng(0x5eed);
    const int starts = r == 2 ? 0 : 8;
    for (int t = 0; t < starts; ++t) {
        const Matrix q = random_stiefel(r, r, rng);
        best = std::min(best, givens_descent(a * q));
    }
    return best;
}

EquivalenceReport check_equivalence(const Matrix& g, Index r, double tol, unsigned long long seed) {
    const Index hw = g.rows(), s = g.cols();
    if (hw > 12 || s > 4 || r > 2) {
        throw std::invalid_argument("equivalence oracle: instance too large (need hw <= 12, s <= 4, r <= 2)");
    }
    if (r < 1 || r >= s) throw std::invalid_argument("equivalence oracle: rank must satisfy 1 <= r < s");
    require_finite(g, "equivalence oracle");

    const double g_fro2 = g.squaredNorm();
    const double scale2 = std::max(1.0, g_fro2);

    // Candidates: the feasible family [B_k, W] R(theta) on a 1e-2 angle grid
    // (plus reflections), and random Stiefel points which are almost surely
    // infeasible when rank(G) = r.
    std::vector<Matrix> candidates;
    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullV);
    const Matrix basis = svd.matrixV().leftCols(r);
    if (r == 1) {
        candidates.push_back(basis);
        candidates.push_back(-basis);
    } else {
        Matrix reflect = Matrix::Identity(2, 2);
        reflect(1, 1) = -1.0;
        for (double th = 0.0; th < 2.0 * std::numbers::pi; th += 1e-2) {
            Matrix rot(2, 2);
            rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
            candidates.push_back(basis * rot);
            candidates.push_back(basis * rot * reflect);
        }
    }
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 200; ++t) candidates.push_back(random_stiefel(s, r, rng));

    EquivalenceReport rep;
    rep.feasible_sets_agree = true;
    rep.norm_chain_holds = true;
    double min_norm = std::numeric_limits<double>::infinity();
    double min_factor = std::numeric_limits<double>::infinity();

    for (const Matrix& v : candidates) {
        ++rep.candidates;
        const Matrix gv = g * v;
        const double gv_fro2 = gv.squaredNorm();

        // Norm-constrained form: ||G V||_F = ||G||_F.
        const bool feasible_norm = std::abs(g_fro2 - gv_fro2) <= tol * scale2;

        // Factor form: solve V U^T = G^T in the least-squares sense.
        const Matrix u = v.colPivHouseholderQr().solve(g.transpose()).transpose();
        const double fit2 = (g - u * v.transpose()).squaredNorm();
        const bool feasible_factor = fit2 <= tol * scale2;

        // ||G||^2 - ||GV||^2 = ||G - G V V^T||^2 for orthonormal V.
        const double chain = (g - gv * v.transpose()).squaredNorm();
        if (std::abs((g_fro2 - gv_fro2) - chain) > tol * scale2) rep.norm_chain_holds = false;

        if (feasible_factor) {
            // (a): a feasible factorization preserves the Frobenius norm.
            if (std::abs(u.squaredNorm() - g_fro2) > tol * scale2) rep.norm_chain_holds = false;
        }
        if (feasible_norm) {
            // (b): a norm-feasible V reproduces G from U = G V.
            if ((g - gv * v.transpose()).squaredNorm() > tol * scale2) rep.norm_chain_holds = false;
        }
        if (feasible_norm != feasible_factor) rep.feasible_sets_agree = false;

        if (feasible_norm) min_norm = std::min(min_norm, gv.cwiseAbs().sum());
        if (feasible_factor) {
            ++rep.feasible;
            min_factor = std::min(min_factor, u.cwiseAbs().sum());
        }
    }

    rep.min_norm_form = min_norm;
    rep.min_factor_form = min_factor;
    if (std::isinf(min_norm) && std::isinf(min_factor)) {
        rep.minima_agree = true;  // both feasible sets empty
    } else {
        rep.minima_agree = std::abs(min_norm - min_factor) <= tol * std::max(1.0, min_norm);
    }
    return rep;
}

}  // namespace e3dtv
