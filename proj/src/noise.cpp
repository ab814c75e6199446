#include "e3dtv/noise.hpp"

#include "e3dtv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace e3dtv {
namespace {

BandRange scaled_range(Index first_1based, Index last_1based, Index bands) {
    constexpr double kReference = 224.0;
    const double f = static_cast<double>(bands) / kReference;
    BandRange r;
    r.first = static_cast<Index>(std::floor(static_cast<double>(first_1based - 1) * f));
    r.last = static_cast<Index>(std::ceil(static_cast<double>(last_1based) * f)) - 1;
    r.first = std::clamp<Index>(r.first, 0, bands - 1);
    r.last = std::clamp<Index>(r.last, r.first, bands - 1);
    return r;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

}  // namespace

std::uint64_t noise_stream_seed(std::uint64_t seed, NoiseStream s) {
    return split_seed(seed, 1000 + static_cast<std::uint64_t>(s));
}

NoiseCase parse_noise_case(const std::string& name) {
    if (name.size() == 1) {
        switch (name[0]) {
            case 'a': case 'A': return NoiseCase::A;
            case 'b': case 'B': return NoiseCase::B;
            case 'c': case 'C': return NoiseCase::C;
            case 'd': case 'D': return NoiseCase::D;
            case 'e': case 'E': return NoiseCase::E;
            case 'f': case 'F': return NoiseCase::F;
            default: break;
        }
    }
    throw std::invalid_argument("unknown noise case '" + name + "' (expected a-f)");
}

char noise_case_letter(NoiseCase c) { return static_cast<char>('a' + static_cast<int>(c)); }

NoiseSpec NoiseSpec::preset(NoiseCase c, Index bands, std::uint64_t seed) {
    NoiseSpec spec;
    spec.noise_case = c;
    spec.seed = seed;
    spec.deadline_bands = scaled_range(91, 130, bands);
    spec.stripe_bands = scaled_range(161, 190, bands);
    switch (c) {
        case NoiseCase::A:
        case NoiseCase::B:
            spec.gaussian_sigma = 0.1;
            spec.impulse_ratio = 0.0;
            break;
        case NoiseCase::C:
        case NoiseCase::D:
            spec.gaussian_sigma = 0.075;
            spec.impulse_ratio = 0.15;
            break;
        case NoiseCase::E:
        case NoiseCase::F:
            spec.gaussian_sigma = 0.0;
            spec.impulse_ratio = 0.0;
            break;
    }
    return spec;
}

void NoiseSpec::validate(Dims dims) const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!(gaussian_sigma >= 0.0) || !(sigma_max >= 0.0)) throw std::invalid_argument("noise: gaussian level must be >= 0");
    if (!in_unit(impulse_ratio) || !in_unit(impulse_max)) throw std::invalid_argument("noise: impulse ratio must lie in [0, 1]");
    auto check_range = [&](BandRange r, const char* what) {
        if (r.empty()) return;
        if (r.first < 0 || r.last >= dims.s) {
            throw std::invalid_argument(std::string("noise: ") + what + " band range [" + std::to_string(r.first) +
                                        ", " + std::to_string(r.last) + "] outside " + std::to_string(dims.s) +
                                        " bands");
        }
    };
    const bool uses_deadlines = noise_case != NoiseCase::A && noise_case != NoiseCase::C;
    if (uses_deadlines) check_range(deadline_bands, "deadline");
    if (noise_case == NoiseCase::F) check_range(stripe_bands, "stripe");
    if (deadline_count_min < 0 || deadline_count_max < deadline_count_min || deadline_width_min < 1 ||
        deadline_width_max < deadline_width_min || stripe_count_min < 0 || stripe_count_max < stripe_count_min) {
        throw std::invalid_argument("noise: invalid count or width range");
    }
}

void add_gaussian(Matrix& x, const std::vector<double>& sigma, std::uint64_t seed) {
    if (static_cast<Index>(sigma.size()) != x.cols()) throw std::invalid_argument("add_gaussian: one level per band");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (Index k = 0; k < x.cols(); ++k) {
        const double sd = sigma[static_cast<std::size_t>(k)];
        for (Index p = 0; p < x.rows(); ++p) {
            const double z = n01(rng);  // always drawn, so streams stay aligned across levels
            x(p, k) += sd * z;
        }
    }
}

void add_impulse(Matrix& x, Dims dims, const std::vector<double>& ratio, std::uint64_t seed) {
    if (static_cast<Index>(ratio.size()) != x.cols()) throw std::invalid_argument("add_impulse: one ratio per band");
    std::mt19937_64 rng(seed);
    std::vector<Index> idx(static_cast<std::size_t>(dims.spatial()));
    for (Index k = 0; k < x.cols(); ++k) {
        const auto count = static_cast<std::size_t>(
            std::llround(ratio[static_cast<std::size_t>(k)] * static_cast<double>(dims.spatial())));
        std::iota(idx.begin(), idx.end(), Index{0});
        stable_shuffle(idx, rng);
        for (std::size_t t = 0; t < count; ++t) x(idx[t], k) = (rng() & 1U) ? 1.0 : 0.0;
    }
}

void add_deadlines(HsiTensor& x, BandRange bands, const NoiseSpec& spec, std::uint64_t seed) {
    if (bands.empty()) return;
    std::mt19937_64 rng(seed);
    const Index h = x.h(), w = x.w();
    for (Index k = bands.first; k <= bands.last; ++k) {
        const int count = uniform_int(rng, spec.deadline_count_min, spec.deadline_count_max);
        for (int c = 0; c < count; ++c) {
            const auto col = static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(w)));
            const int width = uniform_int(rng, spec.deadline_width_min, spec.deadline_width_max);
            for (Index j = col; j < std::min(w, col + width); ++j)
                for (Index i = 0; i < h; ++i) x(i, j, k) = 0.0;
        }
    }
}

void add_stripes(HsiTensor& x, BandRange bands, const NoiseSpec& spec, std::uint64_t seed) {
    if (bands.empty()) return;
    std::mt19937_64 rng(seed);
    const Index h = x.h(), w = x.w();
    std::vector<Index> rows(static_cast<std::size_t>(h));
    for (Index k = bands.first; k <= bands.last; ++k) {
        const int count = std::min<int>(uniform_int(rng, spec.stripe_count_min, spec.stripe_count_max),
                                        static_cast<int>(h));
        std::iota(rows.begin(), rows.end(), Index{0});
        stable_shuffle(rows, rng);
        for (int c = 0; c < count; ++c) {
            const double amp = (rng() & 1U) ? spec.stripe_amplitude : -spec.stripe_amplitude;
            const Index i = rows[static_cast<std::size_t>(c)];
            for (Index j = 0; j < w; ++j) x(i, j, k) += amp;
        }
    }
}

HsiTensor apply_noise(const HsiTensor& x, const NoiseSpec& spec) {
    spec.validate(x.dims());
    const Dims dims = x.dims();
    const auto s = static_cast<std::size_t>(dims.s);
    auto level = [&](double v) { return spec.strict_variance ? std::sqrt(v) : v; };

    std::vector<double> sigma(s, level(spec.gaussian_sigma));
    std::vector<double> impulse(s, spec.impulse_ratio);
    const bool random_levels = spec.noise_case == NoiseCase::E || spec.noise_case == NoiseCase::F;
    if (random_levels) {
        std::mt19937_64 rng(noise_stream_seed(spec.seed, NoiseStream::Levels));
        for (std::size_t k = 0; k < s; ++k) {
            sigma[k] = level(spec.sigma_max * std::generate_canonical<double, 53>(rng));
            impulse[k] = spec.impulse_max * std::generate_canonical<double, 53>(rng);
        }
    }

    Matrix y = x.unfolded();
    add_gaussian(y, sigma, noise_stream_seed(spec.seed, NoiseStream::Gaussian));
    const bool has_impulse = std::any_of(impulse.begin(), impulse.end(), [](double r) { return r > 0.0; });
    if (has_impulse) add_impulse(y, dims, impulse, noise_stream_seed(spec.seed, NoiseStream::Impulse));

    HsiTensor out(dims, std::move(y));
    if (spec.noise_case != NoiseCase::A && spec.noise_case != NoiseCase::C) {
        add_deadlines(out, spec.deadline_bands, spec, noise_stream_seed(spec.seed, NoiseStream::Deadlines));
    }
    if (spec.noise_case == NoiseCase::F) {
        add_stripes(out, spec.stripe_bands, spec, noise_stream_seed(spec.seed, NoiseStream::Stripes));
    }
    return out;
}

}  // namespace e3dtv
