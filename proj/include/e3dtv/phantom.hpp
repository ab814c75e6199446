#pragma once

#include "e3dtv/tensor.hpp"

#include <cstdint>

namespace e3dtv {

/// Synthetic low-rank cube X = A B^T folded to h x w x s.
///
/// Each column of A is a spatial abundance map made of a few random
/// ellipses, Gaussian-blurred with standard deviation `smoothness` pixels
/// (periodic). Each column of B is a positive smooth spectrum (a sum of wide
/// Gaussian bumps over the band axis). Both factors are non-negative, so
/// the cube is scaled (not shifted) into [0, 1] and keeps rank exactly
/// `rank`. Deterministic in `seed`.
[[nodiscard]] HsiTensor gen_phantom(Dims dims, Index rank, double smoothness, std::uint64_t seed);

/// I.i.d. U(0, 1) cube, used as the rough reference in smoothness checks.
[[nodiscard]] HsiTensor uniform_random_tensor(Dims dims, std::uint64_t seed);

}  // namespace e3dtv
