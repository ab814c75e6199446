#include "e3dtv/spectral_solver.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace e3dtv {
namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> circulant_eigenvalues(Index n) {
    std::vector<double> lam(static_cast<std::size_t>(n));
    for (Index f = 0; f < n; ++f) {
        lam[static_cast<std::size_t>(f)] =
            2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(f) / static_cast<double>(n));
    }
    return lam;
}

struct FftwDeleter {
    void operator()(double* p) const { fftw_free(p); }
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

}  // namespace

HsiTensor mode_eigenvalues(Dims dims, int mode_idx) {
    if (!dims.valid()) throw ShapeError("mode_eigenvalues: dimensions must be positive");
    if (mode_idx < 0 || mode_idx > 2) throw std::invalid_argument("mode_eigenvalues: mode must be 0, 1 or 2");
    HsiTensor out(dims);
    const Index n = mode_idx == 0 ? dims.h : (mode_idx == 1 ? dims.w : dims.s);
    const auto lam = circulant_eigenvalues(n);
    for (Index k = 0; k < dims.s; ++k)
        for (Index j = 0; j < dims.w; ++j)
            for (Index i = 0; i < dims.h; ++i) {
                const Index f = mode_idx == 0 ? i : (mode_idx == 1 ? j : k);
                out(i, j, k) = lam[static_cast<std::size_t>(f)];
            }
    return out;
}

HsiTensor build_fft_denominator(Dims dims) {
    Matrix sum = mode_eigenvalues(dims, 0).unfolded();
    sum += mode_eigenvalues(dims, 1).unfolded();
    sum += mode_eigenvalues(dims, 2).unfolded();
    return {dims, std::move(sum)};
}

struct SpectralSolver::Impl {
    Dims dims;
    Index half_h = 0;
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
    std::vector<double> lam_h, lam_w, lam_s;

    [[nodiscard]] Index spectrum_size() const { return half_h * dims.w * dims.s; }

    template <class Denominator>
    Matrix solve(const Matrix& rhs, Denominator&& denom) const {
        if (rhs.rows() != dims.spatial() || rhs.cols() != dims.s) {
            throw ShapeError("SpectralSolver: rhs shape does not match solver dimensions");
        }
        require_finite(rhs, "SpectralSolver rhs");

        const auto n_real = static_cast<std::size_t>(dims.size());
        const auto n_cplx = static_cast<std::size_t>(spectrum_size());
        std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(n_real));
        std::unique_ptr<fftw_complex, FftwDeleter> spec(fftw_alloc_complex(n_cplx));
        std::copy(rhs.data(), rhs.data() + rhs.size(), in.get());

        fftw_execute_dft_r2c(forward, in.get(), spec.get());

        const double scale = 1.0 / static_cast<double>(dims.size());
        for (Index k = 0; k < dims.s; ++k) {
            for (Index j = 0; j < dims.w; ++j) {
                fftw_complex* row = spec.get() + (k * dims.w + j) * half_h;
                for (Index i = 0; i < half_h; ++i) {
                    const double d = denom(i, j, k);
                    row[i][0] *= scale / d;
                    row[i][1] *= scale / d;
                }
            }
        }

        fftw_execute_dft_c2r(inverse, spec.get(), in.get());

        Matrix out(dims.spatial(), dims.s);
        std::copy(in.get(), in.get() + n_real, out.data());
        return out;
    }
};

SpectralSolver::SpectralSolver(Dims dims) : impl_(std::make_unique<Impl>()) {
    if (!dims.valid()) throw ShapeError("SpectralSolver: dimensions must be positive");
    impl_->dims = dims;
    impl_->half_h = dims.h / 2 + 1;
    impl_->lam_h = circulant_eigenvalues(dims.h);
    impl_->lam_w = circulant_eigenvalues(dims.w);
    impl_->lam_s = circulant_eigenvalues(dims.s);

    // Canonical storage is column-major over (i, j, k), which is FFTW's
    // row-major layout for extents (s, w, h).
    const int n0 = static_cast<int>(dims.s), n1 = static_cast<int>(dims.w), n2 = static_cast<int>(dims.h);
    std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(static_cast<std::size_t>(dims.size())));
    std::unique_ptr<fftw_complex, FftwDeleter> spec(
        fftw_alloc_complex(static_cast<std::size_t>(impl_->spectrum_size())));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    impl_->forward = fftw_plan_dft_r2c_3d(n0, n1, n2, in.get(), spec.get(), flags);
    impl_->inverse = fftw_plan_dft_c2r_3d(n0, n1, n2, spec.get(), in.get(), flags);
    if (impl_->forward == nullptr || impl_->inverse == nullptr) {
        throw std::runtime_error("SpectralSolver: FFTW planning failed");
    }
}

SpectralSolver::~SpectralSolver() {
    if (!impl_) return;
    std::lock_guard lock(planner_mutex());
    if (impl_->forward) fftw_destroy_plan(impl_->forward);
    if (impl_->inverse) fftw_destroy_plan(impl_->inverse);
}

SpectralSolver::SpectralSolver(SpectralSolver&&) noexcept = default;
SpectralSolver& SpectralSolver::operator=(SpectralSolver&&) noexcept = default;

const Dims& SpectralSolver::dims() const { return impl_->dims; }

Matrix SpectralSolver::solve(const Matrix& rhs, const SystemWeights& weights) const {
    if (!(weights.identity > 0.0)) {
        throw std::invalid_argument("SpectralSolver: identity weight must be positive");
    }
    for (double g : weights.gradient) {
        if (!(g >= 0.0)) throw std::invalid_argument("SpectralSolver: gradient weights must be non-negative");
    }
    const auto& im = *impl_;
    return im.solve(rhs, [&](Index i, Index j, Index k) {
        return weights.identity + weights.gradient[0] * im.lam_h[static_cast<std::size_t>(i)] +
               weights.gradient[1] * im.lam_w[static_cast<std::size_t>(j)] +
               weights.gradient[2] * im.lam_s[static_cast<std::size_t>(k)];
    });
}

Matrix SpectralSolver::solve(const Matrix& rhs, const HsiTensor& denominator) const {
    if (denominator.dims() != impl_->dims) {
        throw ShapeError("SpectralSolver: denominator shape does not match solver dimensions");
    }
    if (!(denominator.unfolded().array() > 0.0).all()) {
        throw std::domain_error("SpectralSolver: denominator must be strictly positive");
    }
    return impl_->solve(rhs, [&](Index i, Index j, Index k) { return denominator(i, j, k); });
}

Matrix solve_x_system(const LinearSystemRhs& rhs, double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("solve_x_system: mu must be positive");
    const Dims dims = rhs.tx.dims();
    if ((rhs.tx.unfolded().array() < 0.0).any()) {
        throw std::domain_error("solve_x_system: T_x must be non-negative");
    }
    Matrix denom = (mu + mu * rhs.tx.unfolded().array()).matrix();
    const SpectralSolver solver(dims);
    return solver.solve(rhs.hx, HsiTensor(dims, std::move(denom)));
}

}  // namespace e3dtv
