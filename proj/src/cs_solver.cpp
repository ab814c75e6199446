#include "e3dtv/cs_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace e3dtv {

CsConfig CsConfig::for_ratio(double ratio, Index bands) {
    CsConfig cfg;
    if (ratio <= 0.01) {
        cfg.rank = 5;
        cfg.tau = 0.0075;
    } else {
        cfg.rank = 7;
        cfg.tau = 0.015;
    }
    cfg.rank = std::min(cfg.rank, bands - 1);
    return cfg;
}

void CsConfig::validate(Index bands) const {
    auto fail = [](const std::string& msg) { throw ConfigError("cs config: " + msg); };
    if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be positive");
    if (!baseline_3dtv && (rank < 1 || rank >= bands)) {
        fail("rank must satisfy 1 <= rank < s (rank " + std::to_string(rank) + ", s " + std::to_string(bands) + ")");
    }
    if (!(mu0 > 0.0)) fail("mu0 must be positive");
    if (!(mu_growth >= 1.0)) fail("mu_growth must be >= 1");
    if (!(mu_max >= mu0)) fail("mu_max must be >= mu0");
    if (!(mu4_factor > 0.0)) fail("mu4_factor must be positive");
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) fail("eps1 and eps2 must be positive");
    if (max_iters < 1) fail("max_iters must be >= 1");
    if (!(cg_tol > 0.0) || cg_max_iters < 1) fail("cg_tol and cg_max_iters must be positive");
    if (threads < 1) fail("threads must be >= 1");
}

CsState initial_cs_state(const Vector& y, const CompressiveOperator& op, const CsConfig& cfg) {
    const Dims dims = op.dims();
    CsState st;
    st.z = op.adjoint_matrix({y.data(), static_cast<std::size_t>(y.size())});
    st.x = st.z;
    st.e = Matrix::Zero(dims.spatial(), dims.s);
    st.gamma1 = Vector::Zero(op.m());
    st.gamma2 = Matrix::Zero(dims.spatial(), dims.s);
    st.set_penalty(cfg.mu0, cfg.mu4_factor);
    for (Mode m : kModes) {
        const int n = mode_index(m);
        const Matrix g = diff(st.x, dims, m);
        Matrix v = cfg.baseline_3dtv ? Matrix::Identity(dims.s, dims.s)
                                     : leading_right_singular_vectors(g, cfg.rank);
        st.factors[n].u = g * v;
        st.factors[n].v = std::move(v);
        st.multipliers[n] = Matrix::Zero(dims.spatial(), dims.s);
    }
    return st;
}

Matrix solve_z(const CsState& st, const Vector& y, const CompressiveOperator& op, const CsConfig& cfg,
               CgResult* info) {
    const Dims dims = op.dims();
    const double mu4 = st.mu[3], mu5 = st.mu[4];
    if (!(mu5 > 0.0) || !(mu4 >= 0.0)) throw std::invalid_argument("solve_z: penalties must satisfy mu4 >= 0, mu5 > 0");

    const Vector meas_rhs = mu4 * y + st.gamma1;
    const Vector back = op.adjoint({meas_rhs.data(), static_cast<std::size_t>(meas_rhs.size())});
    const Matrix rhs_m = mu5 * (st.x + st.e) - st.gamma2;
    Vector rhs = Eigen::Map<const Vector>(rhs_m.data(), rhs_m.size()) + back;

    auto apply = [&](const Vector& v) -> Vector {
        Vector out = mu5 * v;
        if (mu4 != 0.0) {
            const Vector pv = op.apply(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
            out += mu4 * op.adjoint({pv.data(), static_cast<std::size_t>(pv.size())});
        }
        return out;
    };

    Vector z = Eigen::Map<const Vector>(st.z.data(), st.z.size());
    const CgResult res = conjugate_gradient(apply, rhs, z, cfg.cg_tol, cfg.cg_max_iters);
    if (info) *info = res;
    if (!res.converged) {
        throw NumericalError("solve_z: conjugate gradient stalled at relative residual " +
                             std::to_string(res.relative_residual) + " after " + std::to_string(res.iterations) +
                             " iterations");
    }
    return Eigen::Map<const Matrix>(z.data(), dims.spatial(), dims.s);
}

Matrix update_cs_x(const CsState& st, const SpectralSolver& solver) {
    const Dims dims = solver.dims();
    Matrix hx = st.mu[4] * (st.z - st.e) + st.gamma2;
    for (Mode m : kModes) {
        const int n = mode_index(m);
        const FactorPair& f = st.factors[n];
        hx += diff_adjoint(st.mu[n] * (f.u * f.v.transpose()) - st.multipliers[n], dims, m);
    }
    return solver.solve(hx, SystemWeights{{st.mu[0], st.mu[1], st.mu[2]}, st.mu[4]});
}

Matrix update_cs_e(const CsState& st) { return (st.mu[4] * (st.z - st.x) + st.gamma2) / (1.0 + st.mu[4]); }

namespace {

void check_cs_state(const CsState& st, int iter) {
    bool broken = !st.z.allFinite() || !st.x.allFinite() || !st.e.allFinite() || !st.gamma1.allFinite() ||
                  !st.gamma2.allFinite();
    for (int n = 0; n < 3; ++n) {
        broken = broken || !st.factors[n].u.allFinite() || !st.factors[n].v.allFinite() ||
                 !st.multipliers[n].allFinite();
    }
    if (broken) throw NumericalError("reconstruct: non-finite iterate at iteration " + std::to_string(iter));
}

}  // namespace

CsResult reconstruct(const Vector& y, const CompressiveOperator& op, const CsConfig& cfg) {
    const Dims dims = op.dims();
    cfg.validate(dims.s);
    if (y.size() != op.m()) {
        throw std::invalid_argument("reconstruct: " + std::to_string(y.size()) + " measurements, operator expects " +
                                    std::to_string(op.m()));
    }
    if (!y.allFinite()) throw std::domain_error("reconstruct: non-finite measurement");
    const auto start = std::chrono::steady_clock::now();

    const double y_norm2 = y.squaredNorm() > 0.0 ? y.squaredNorm() : 1.0;
    const double y_norm = std::sqrt(y_norm2);
    const SpectralSolver solver(dims);
    CsState st = initial_cs_state(y, op, cfg);
    CsResult out;
    SolverReport& report = out.report;
    std::array<Matrix, 3> grad;
    double base_mu = cfg.mu0;

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        CgResult cg;
        st.z = solve_z(st, y, op, cfg, &cg);
        out.cg_iterations.push_back(cg.iterations);
        st.x = update_cs_x(st, solver);
        st.e = update_cs_e(st);

#pragma omp parallel for num_threads(cfg.threads) schedule(static)
        for (int n = 0; n < 3; ++n) {
            const Mode m = kModes[static_cast<std::size_t>(n)];
            grad[n] = diff(st.x, dims, m);
            FactorPair& f = st.factors[n];
            f.u = update_u(grad[n], st.multipliers[n], f.v, st.mu[n], cfg.tau);
            if (!cfg.baseline_3dtv) f.v = update_v(grad[n], st.multipliers[n], f.u, f.v, st.mu[n]);
            st.multipliers[n] += st.mu[n] * (grad[n] - f.u * f.v.transpose());
        }

        const Vector meas_residual = y - op.apply(st.z);
        st.gamma1 += st.mu[3] * meas_residual;
        const Matrix coupling = st.z - st.x - st.e;
        st.gamma2 += st.mu[4] * coupling;
        check_cs_state(st, iter);

        const double fidelity = meas_residual.norm() / y_norm;
        double gradient = coupling.squaredNorm() / y_norm2;
        double objective = 0.5 * st.e.squaredNorm();
        for (int n = 0; n < 3; ++n) {
            const FactorPair& f = st.factors[n];
            gradient = std::max(gradient, (grad[n] - f.u * f.v.transpose()).squaredNorm() / y_norm2);
            objective += cfg.tau * f.u.cwiseAbs().sum();
        }
        base_mu = std::min(base_mu * cfg.mu_growth, cfg.mu_max);
        st.set_penalty(base_mu, cfg.mu4_factor);

        report.fidelity_residual.push_back(fidelity);
        report.gradient_residual.push_back(gradient);
        report.objective.push_back(objective);
        report.mu.push_back(base_mu);
        report.iterations = iter;
        if (fidelity <= cfg.eps1 && gradient <= cfg.eps2) {
            report.converged = true;
            break;
        }
    }

    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.z = HsiTensor(dims, std::move(st.z));
    out.x = HsiTensor(dims, std::move(st.x));
    return out;
}

}  // namespace e3dtv
