#include "e3dtv/compressive_operator.hpp"

#include "e3dtv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace e3dtv {

Index next_pow2(Index n) {
    Index p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fwht(std::span<double> data) {
    const std::size_t n = data.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fwht: length must be a power of two");
    for (std::size_t len = 1; len < n; len <<= 1) {
        for (std::size_t i = 0; i < n; i += len << 1) {
            for (std::size_t j = i; j < i + len; ++j) {
                const double a = data[j], b = data[j + len];
                data[j] = a + b;
                data[j + len] = a - b;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (double& v : data) v *= scale;
}

CompressiveOperator CompressiveOperator::build(Dims dims, double ratio, std::uint64_t seed) {
    if (!dims.valid()) throw std::invalid_argument("CompressiveOperator: dimensions must be positive");
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw std::invalid_argument("CompressiveOperator: sampling ratio must lie in (0, 1]");
    }
    const Index n = dims.size();
    const Index n_pad = next_pow2(n);
    if (n_pad > (Index{1} << 31)) throw std::invalid_argument("CompressiveOperator: signal too long");
    const auto m = static_cast<Index>(std::llround(ratio * static_cast<double>(n)));
    if (m < 1) {
        throw std::invalid_argument("CompressiveOperator: ratio " + std::to_string(ratio) + " on " +
                                    std::to_string(n) + " voxels yields zero measurements");
    }

    CompressiveOperator op;
    op.dims_ = dims;
    op.ratio_ = ratio;
    op.seed_ = seed;

    op.perm_.resize(static_cast<std::size_t>(n_pad));
    std::iota(op.perm_.begin(), op.perm_.end(), 0U);
    std::mt19937_64 perm_rng(split_seed(seed, 0));
    stable_shuffle(op.perm_, perm_rng);

    // Row 0 of H measures the sum of the signal. Constants are in the null
    // space of every difference operator, so that row is always kept and the
    // other m - 1 rows are drawn at random.
    std::vector<std::uint32_t> slots(static_cast<std::size_t>(n_pad - 1));
    std::iota(slots.begin(), slots.end(), 1U);
    std::mt19937_64 sample_rng(split_seed(seed, 1));
    stable_shuffle(slots, sample_rng);
    op.sample_idx_.assign(1, 0U);
    op.sample_idx_.insert(op.sample_idx_.end(), slots.begin(), slots.begin() + (m - 1));
    std::sort(op.sample_idx_.begin(), op.sample_idx_.end());

    // Bijection check on the permutation.
    std::vector<bool> seen(op.perm_.size(), false);
    for (auto p : op.perm_) {
        if (p >= seen.size() || seen[p]) throw std::logic_error("CompressiveOperator: permutation is not a bijection");
        seen[p] = true;
    }
    return op;
}

Vector CompressiveOperator::apply(std::span<const double> z) const {
    if (static_cast<Index>(z.size()) != n()) {
        throw std::invalid_argument("CompressiveOperator::apply: signal length " + std::to_string(z.size()) +
                                    ", expected " + std::to_string(n()));
    }
    const auto n_sig = z.size();
    std::vector<double> buf(perm_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) {
        const auto src = perm_[i];
        buf[i] = src < n_sig ? z[src] : 0.0;
    }
    fwht(buf);
    Vector y(m());
    for (Index i = 0; i < m(); ++i) y(i) = buf[sample_idx_[static_cast<std::size_t>(i)]];
    return y;
}

Vector CompressiveOperator::adjoint(std::span<const double> y) const {
    if (static_cast<Index>(y.size()) != m()) {
        throw std::invalid_argument("CompressiveOperator::adjoint: measurement length " + std::to_string(y.size()) +
                                    ", expected " + std::to_string(m()));
    }
    std::vector<double> buf(perm_.size(), 0.0);
    for (std::size_t i = 0; i < sample_idx_.size(); ++i) buf[sample_idx_[i]] = y[i];
    fwht(buf);
    Vector z = Vector::Zero(n());
    const auto n_sig = static_cast<std::uint32_t>(n());
    for (std::size_t i = 0; i < perm_.size(); ++i) {
        const auto dst = perm_[i];
        if (dst < n_sig) z(dst) = buf[i];
    }
    return z;
}

Vector CompressiveOperator::apply(const Matrix& z) const {
    return apply(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
}

Matrix CompressiveOperator::adjoint_matrix(std::span<const double> y) const {
    Vector z = adjoint(y);
    return Eigen::Map<const Matrix>(z.data(), dims_.spatial(), dims_.s);
}

}  // namespace e3dtv
