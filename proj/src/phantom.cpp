#include "e3dtv/phantom.hpp"

#include "e3dtv/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace e3dtv {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

// Periodic separable Gaussian blur of an h x w column-major image.
Matrix blur(const Matrix& img, double sigma) {
    if (sigma <= 0.0) return img;
    const Index h = img.rows(), w = img.cols();
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        const double v = std::exp(-0.5 * t * t / (sigma * sigma));
        kernel[static_cast<std::size_t>(t + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;

    Matrix tmp = Matrix::Zero(h, w);
    for (Index j = 0; j < w; ++j)
        for (Index i = 0; i < h; ++i)
            for (int t = -radius; t <= radius; ++t)
                tmp(i, j) += kernel[static_cast<std::size_t>(t + radius)] * img(((i + t) % h + h) % h, j);
    Matrix out = Matrix::Zero(h, w);
    for (Index j = 0; j < w; ++j)
        for (Index i = 0; i < h; ++i)
            for (int t = -radius; t <= radius; ++t)
                out(i, j) += kernel[static_cast<std::size_t>(t + radius)] * tmp(i, ((j + t) % w + w) % w);
    return out;
}

Matrix abundance_map(Index h, Index w, double smoothness, std::mt19937_64& rng) {
    Matrix img = Matrix::Constant(h, w, 0.05);
    const int blobs = 3 + static_cast<int>(uniform_below(rng, 4));
    for (int b = 0; b < blobs; ++b) {
        const double ci = uniform(rng, 0.0, static_cast<double>(h));
        const double cj = uniform(rng, 0.0, static_cast<double>(w));
        const double ri = uniform(rng, 0.1, 0.35) * static_cast<double>(h);
        const double rj = uniform(rng, 0.1, 0.35) * static_cast<double>(w);
        const double amp = uniform(rng, 0.3, 1.0);
        for (Index j = 0; j < w; ++j)
            for (Index i = 0; i < h; ++i) {
                const double di = (static_cast<double>(i) - ci) / ri;
                const double dj = (static_cast<double>(j) - cj) / rj;
                if (di * di + dj * dj <= 1.0) img(i, j) += amp;
            }
    }
    return blur(img, smoothness);
}

Vector spectrum(Index s, std::mt19937_64& rng) {
    Vector b = Vector::Constant(s, 0.1);
    for (int bump = 0; bump < 3; ++bump) {
        const double centre = uniform(rng, -0.1, 1.1);
        const double width = uniform(rng, 0.15, 0.4);
        const double amp = uniform(rng, 0.2, 1.0);
        for (Index k = 0; k < s; ++k) {
            const double t = s > 1 ? static_cast<double>(k) / static_cast<double>(s - 1) : 0.0;
            b(k) += amp * std::exp(-0.5 * (t - centre) * (t - centre) / (width * width));
        }
    }
    return b;
}

}  // namespace

HsiTensor gen_phantom(Dims dims, Index rank, double smoothness, std::uint64_t seed) {
    if (!dims.valid()) throw ShapeError("gen_phantom: dimensions must be positive");
    if (rank < 1 || rank > dims.s || rank > dims.spatial()) {
        throw std::invalid_argument("gen_phantom: rank must lie in [1, min(hw, s)]");
    }
    if (!(smoothness >= 0.0)) throw std::invalid_argument("gen_phantom: smoothness must be non-negative");

    std::mt19937_64 rng(split_seed(seed, 100));
    Matrix a(dims.spatial(), rank);
    Matrix b(dims.s, rank);
    for (Index c = 0; c < rank; ++c) {
        const Matrix map = abundance_map(dims.h, dims.w, smoothness, rng);
        a.col(c) = Eigen::Map<const Vector>(map.data(), map.size());
        b.col(c) = spectrum(dims.s, rng);
    }
    Matrix x = a * b.transpose();
    x /= x.maxCoeff();
    return {dims, std::move(x)};
}

HsiTensor uniform_random_tensor(Dims dims, std::uint64_t seed) {
    std::mt19937_64 rng(split_seed(seed, 101));
    HsiTensor t(dims);
    for (double& v : t.flat()) v = std::generate_canonical<double, 53>(rng);
    return t;
}

}  // namespace e3dtv
