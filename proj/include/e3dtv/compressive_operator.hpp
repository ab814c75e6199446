#pragma once

#include "e3dtv/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace e3dtv {

/// In-place orthonormal fast Walsh-Hadamard transform (scaled by 1/sqrt(n)).
/// Length must be a power of two. The transform is its own inverse.
void fwht(std::span<double> data);

/// Compressive measurement operator Psi = D * H * P on a flattened cube.
///
/// The signal (length n = h*w*s, canonical order) is zero-padded to the next
/// power of two n_pad, permuted (P), transformed by the orthonormal
/// Walsh-Hadamard matrix (H) and subsampled at m sorted positions (D).
/// Position 0 (the DC row) is always sampled; the rest are random.
/// The adjoint runs the transposed chain and truncates the padding, so when
/// n is a power of two Psi Psi^* = I_m and Psi^* Psi is an orthogonal
/// projection.
class CompressiveOperator {
public:
    /// m = round(ratio * n). Deterministic in (dims, ratio, seed).
    /// Throws std::invalid_argument for ratio outside (0, 1] or m == 0.
    static CompressiveOperator build(Dims dims, double ratio, std::uint64_t seed);

    [[nodiscard]] const Dims& dims() const { return dims_; }
    [[nodiscard]] Index n() const { return dims_.size(); }
    [[nodiscard]] Index n_pad() const { return static_cast<Index>(perm_.size()); }
    [[nodiscard]] Index m() const { return static_cast<Index>(sample_idx_.size()); }
    [[nodiscard]] double ratio() const { return ratio_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    /// perm[i] is the source index of permuted slot i: (P z)[i] = z[perm[i]].
    [[nodiscard]] const std::vector<std::uint32_t>& permutation() const { return perm_; }
    [[nodiscard]] const std::vector<std::uint32_t>& sample_indices() const { return sample_idx_; }

    /// z has length n; returns m measurements.
    [[nodiscard]] Vector apply(std::span<const double> z) const;
    /// y has length m; returns a length-n signal.
    [[nodiscard]] Vector adjoint(std::span<const double> y) const;

    [[nodiscard]] Vector apply(const Matrix& z) const;
    /// Adjoint folded back to an (h*w) x s matrix.
    [[nodiscard]] Matrix adjoint_matrix(std::span<const double> y) const;

private:
    Dims dims_{};
    double ratio_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<std::uint32_t> perm_;
    std::vector<std::uint32_t> sample_idx_;
};

/// Smallest power of two >= n.
[[nodiscard]] Index next_pow2(Index n);

}  // namespace e3dtv
