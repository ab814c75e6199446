#pragma once

#include "e3dtv/tensor.hpp"

#include <array>

namespace e3dtv {

/// Direction of a finite difference.
enum class Mode { Height = 1, Width = 2, Spectral = 3 };

inline constexpr std::array<Mode, 3> kModes{Mode::Height, Mode::Width, Mode::Spectral};

/// Forward circular difference along `mode`, on the unfolded (h*w) x s matrix:
///   G(i,j,k) = X(i,j,k) - X(next index along mode), wrapping at the boundary.
[[nodiscard]] Matrix diff(const Matrix& x, Dims dims, Mode mode);

/// Exact transpose of diff: A(i,j,k) = Y(i,j,k) - Y(previous index along mode).
[[nodiscard]] Matrix diff_adjoint(const Matrix& g, Dims dims, Mode mode);

[[nodiscard]] HsiTensor diff(const HsiTensor& x, Mode mode);
[[nodiscard]] HsiTensor diff_adjoint(const HsiTensor& g, Mode mode);

/// The three gradient maps of a cube, each the same shape as the source.
struct GradientStack {
    HsiTensor g1;
    HsiTensor g2;
    HsiTensor g3;

    [[nodiscard]] const HsiTensor& operator[](Mode m) const {
        switch (m) {
            case Mode::Height: return g1;
            case Mode::Width: return g2;
            case Mode::Spectral: break;
        }
        return g3;
    }
};

[[nodiscard]] GradientStack gradients(const HsiTensor& x);

inline constexpr int mode_index(Mode m) { return static_cast<int>(m) - 1; }

}  // namespace e3dtv
