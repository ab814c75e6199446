#include "e3dtv/denoise.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <string>

namespace e3dtv {

SolverConfig SolverConfig::with_defaults(Dims dims, double c, Index rank) {
    SolverConfig cfg;
    const double root = std::sqrt(static_cast<double>(dims.spatial()));
    cfg.lambda = 1.0 / root;
    cfg.tau = c * root;
    cfg.rank = rank;
    return cfg;
}

void SolverConfig::validate(Index bands) const {
    auto fail = [](const std::string& msg) { throw ConfigError("solver config: " + msg); };
    if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be positive");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("lambda must be positive");
    if (!baseline_3dtv && (rank < 1 || rank >= bands)) {
        fail("rank must satisfy 1 <= rank < s (rank " + std::to_string(rank) + ", s " + std::to_string(bands) + ")");
    }
    if (!(mu0 > 0.0)) fail("mu0 must be positive");
    if (!(mu_growth >= 1.0)) fail("mu_growth must be >= 1");
    if (!(mu_max >= mu0)) fail("mu_max must be >= mu0");
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) fail("eps1 and eps2 must be positive");
    if (max_iters < 1) fail("max_iters must be >= 1");
    if (threads < 1) fail("threads must be >= 1");
}

Matrix leading_right_singular_vectors(const Matrix& g, Index r) {
    // Eigenvectors of the s x s Gram matrix; cheaper than an SVD of the tall map.
    const Matrix gram = g.transpose() * g;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const Matrix& vecs = eig.eigenvectors();  // ascending eigenvalues
    const Index s = gram.cols();
    Matrix v(s, r);
    for (Index j = 0; j < r; ++j) {
        v.col(j) = vecs.col(s - 1 - j);
        Index arg = 0;
        v.col(j).cwiseAbs().maxCoeff(&arg);
        if (v(arg, j) < 0.0) v.col(j) *= -1.0;
    }
    return v;
}

DenoiseState initial_state(const Matrix& y, Dims dims, const SolverConfig& cfg) {
    const Index r = cfg.effective_rank(dims.s);
    DenoiseState st;
    st.x = y;
    st.e = Matrix::Zero(y.rows(), y.cols());
    st.gamma = Matrix::Zero(y.rows(), y.cols());
    st.mu = cfg.mu0;
    for (Mode m : kModes) {
        const int n = mode_index(m);
        const Matrix g = diff(y, dims, m);
        Matrix v = cfg.baseline_3dtv ? Matrix::Identity(dims.s, dims.s) : leading_right_singular_vectors(g, r);
        st.factors[n].u = g * v;
        st.factors[n].v = std::move(v);
        st.multipliers[n] = Matrix::Zero(y.rows(), y.cols());
    }
    return st;
}

Matrix update_x(const DenoiseState& st, const Matrix& y, const SpectralSolver& solver) {
    const Dims dims = solver.dims();
    Matrix hx = st.mu * (y - st.e) + st.gamma;
    for (Mode m : kModes) {
        const int n = mode_index(m);
        const FactorPair& f = st.factors[n];
        hx += diff_adjoint(st.mu * (f.u * f.v.transpose()) - st.multipliers[n], dims, m);
    }
    return solver.solve(hx, SystemWeights::uniform(st.mu));
}

Matrix update_e(const Matrix& y, const Matrix& x, const Matrix& gamma, double mu, double lambda) {
    return soft_threshold(y - x + gamma / mu, lambda / mu);
}

Matrix update_u(const Matrix& grad_x, const Matrix& multiplier, const Matrix& v, double mu, double tau) {
    return soft_threshold((grad_x + multiplier / mu) * v, tau / mu);
}

Matrix update_v(const Matrix& grad_x, const Matrix& multiplier, const Matrix& u, const Matrix& previous_v,
                double mu) {
    if (u.squaredNorm() == 0.0) return previous_v;
    return procrustes_v(grad_x + multiplier / mu, u);
}

void update_multipliers(DenoiseState& st, const Matrix& y, const std::array<Matrix, 3>& grad_x,
                        const SolverConfig& cfg) {
    for (int n = 0; n < 3; ++n) {
        const FactorPair& f = st.factors[n];
        st.multipliers[n] += st.mu * (grad_x[n] - f.u * f.v.transpose());
    }
    st.gamma += st.mu * (y - st.x - st.e);
    st.mu = std::min(st.mu * cfg.mu_growth, cfg.mu_max);
}

namespace {

void check_state(const DenoiseState& st, int iter) {
    auto bad = [&](const Matrix& m) { return !m.allFinite(); };
    bool broken = bad(st.x) || bad(st.e) || bad(st.gamma);
    for (int n = 0; n < 3; ++n) {
        broken = broken || bad(st.factors[n].u) || bad(st.factors[n].v) || bad(st.multipliers[n]);
    }
    if (broken) {
        throw NumericalError("denoise: non-finite iterate at iteration " + std::to_string(iter) +
                             " (mu = " + std::to_string(st.mu) + ")");
    }
}

}  // namespace

DenoiseResult denoise(const HsiTensor& y_tensor, const SolverConfig& cfg) {
    const Dims dims = y_tensor.dims();
    cfg.validate(dims.s);
    const auto start = std::chrono::steady_clock::now();

    const Matrix& y = y_tensor.unfolded();
    require_finite(y, "denoise input");
    const double y_norm2 = y.squaredNorm() > 0.0 ? y.squaredNorm() : 1.0;

    const SpectralSolver solver(dims);
    DenoiseState st = initial_state(y, dims, cfg);
    SolverReport report;
    std::array<Matrix, 3> grad;

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        st.x = update_x(st, y, solver);
        st.e = update_e(y, st.x, st.gamma, st.mu, cfg.lambda);

#pragma omp parallel for num_threads(cfg.threads) schedule(static)
        for (int n = 0; n < 3; ++n) {
            const Mode m = kModes[static_cast<std::size_t>(n)];
            grad[n] = diff(st.x, dims, m);
            FactorPair& f = st.factors[n];
            f.u = update_u(grad[n], st.multipliers[n], f.v, st.mu, cfg.tau);
            if (!cfg.baseline_3dtv) f.v = update_v(grad[n], st.multipliers[n], f.u, f.v, st.mu);
        }

        update_multipliers(st, y, grad, cfg);
        check_state(st, iter);

        const double fidelity = (y - st.x - st.e).squaredNorm() / y_norm2;
        double gradient = 0.0;
        double objective = cfg.lambda * st.e.cwiseAbs().sum();
        for (int n = 0; n < 3; ++n) {
            const FactorPair& f = st.factors[n];
            gradient = std::max(gradient, (grad[n] - f.u * f.v.transpose()).squaredNorm() / y_norm2);
            objective += cfg.tau * f.u.cwiseAbs().sum();
        }
        report.fidelity_residual.push_back(fidelity);
        report.gradient_residual.push_back(gradient);
        report.objective.push_back(objective);
        report.mu.push_back(st.mu);
        report.iterations = iter;

        if (fidelity <= cfg.eps1 && gradient <= cfg.eps2) {
            report.converged = true;
            break;
        }
    }

    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {HsiTensor(dims, std::move(st.x)), HsiTensor(dims, std::move(st.e)), std::move(report)};
}

}  // namespace e3dtv
