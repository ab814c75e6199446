#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace e3dtv {

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history;  ///< relative residual after each iteration
};

/// Conjugate gradient for a symmetric positive-definite operator given as a
/// callable `apply(const VectorXd&) -> VectorXd`. Starts from `x` and stops
/// once ||b - A x|| <= tol * ||b||. Unpreconditioned.
template <class Apply>
CgResult conjugate_gradient(const Apply& apply, const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol,
                            int max_iters) {
    CgResult res;
    const double b_norm = b.norm();
    if (b_norm == 0.0) {
        x.setZero();
        res.converged = true;
        return res;
    }
    Eigen::VectorXd r = b - apply(x);
    double rho = r.squaredNorm();
    res.relative_residual = std::sqrt(rho) / b_norm;
    if (res.relative_residual <= tol) {
        res.converged = true;
        return res;
    }
    Eigen::VectorXd p = r;
    for (int it = 1; it <= max_iters; ++it) {
        const Eigen::VectorXd q = apply(p);
        const double pq = p.dot(q);
        if (!(pq > 0.0)) break;  // operator not SPD along p, or breakdown
        const double alpha = rho / pq;
        x.noalias() += alpha * p;
        r.noalias() -= alpha * q;
        const double rho_next = r.squaredNorm();
        res.iterations = it;
        res.relative_residual = std::sqrt(rho_next) / b_norm;
        res.residual_history.push_back(res.relative_residual);
        if (res.relative_residual <= tol) {
            res.converged = true;
            break;
        }
        p = r + (rho_next / rho) * p;
        rho = rho_next;
    }
    return res;
}

}  // namespace e3dtv
