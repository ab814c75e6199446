#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>

namespace e3dtv {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Shape of a hyperspectral cube: spatial height, spatial width, spectral bands.
struct Dims {
    Index h = 0;
    Index w = 0;
    Index s = 0;

    [[nodiscard]] Index spatial() const { return h * w; }
    [[nodiscard]] Index size() const { return h * w * s; }
    [[nodiscard]] bool valid() const { return h > 0 && w > 0 && s > 0; }

    friend bool operator==(const Dims&, const Dims&) = default;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A dense h x w x s intensity cube.
///
/// Storage is the mode-3 unfolding itself: an (h*w) x s column-major matrix
/// whose row index is i + h*j (column-major over the spatial grid) and whose
/// column index is the band k. Voxel (i, j, k) therefore lives at flat offset
/// i + h*j + h*w*k, and unfold3 is a zero-copy view.
class HsiTensor {
public:
    HsiTensor() = default;

    /// Zero-filled cube.
    explicit HsiTensor(Dims dims);

    /// Takes ownership of an unfolded (h*w) x s matrix. Throws ShapeError on a
    /// size mismatch and std::domain_error on non-finite entries.
    HsiTensor(Dims dims, Matrix unfolded);

    /// Copies a flat buffer laid out in the canonical order.
    static HsiTensor from_flat(Dims dims, std::span<const double> values);

    [[nodiscard]] const Dims& dims() const { return dims_; }
    [[nodiscard]] Index h() const { return dims_.h; }
    [[nodiscard]] Index w() const { return dims_.w; }
    [[nodiscard]] Index s() const { return dims_.s; }
    [[nodiscard]] Index size() const { return dims_.size(); }

    double& operator()(Index i, Index j, Index k) { return data_(i + dims_.h * j, k); }
    double operator()(Index i, Index j, Index k) const { return data_(i + dims_.h * j, k); }

    [[nodiscard]] const Matrix& unfolded() const { return data_; }
    [[nodiscard]] Matrix& unfolded() { return data_; }

    [[nodiscard]] std::span<const double> flat() const {
        return {data_.data(), static_cast<std::size_t>(data_.size())};
    }
    [[nodiscard]] std::span<double> flat() {
        return {data_.data(), static_cast<std::size_t>(data_.size())};
    }

    /// Band k as an h x w image (column-major).
    [[nodiscard]] Eigen::Map<const Matrix> band(Index k) const {
        return {data_.col(k).data(), dims_.h, dims_.w};
    }

    friend bool operator==(const HsiTensor& a, const HsiTensor& b) {
        return a.dims_ == b.dims_ && a.data_ == b.data_;
    }

private:
    Dims dims_{};
    Matrix data_;
};

/// Mode-3 unfolding: (h*w) x s matrix, one column per band.
[[nodiscard]] const Matrix& unfold3(const HsiTensor& x);

/// Inverse of unfold3. Validates shape and finiteness.
[[nodiscard]] HsiTensor fold3(const Matrix& unfolded, Dims dims);

/// Throws std::domain_error naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

}  // namespace e3dtv
