#pragma once

#include "e3dtv/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace e3dtv {

/// Corruption scenarios:
///   A  Gaussian, same level on every band
///   B  A + deadlines on a band range
///   C  Gaussian + salt-and-pepper impulse
///   D  C + deadlines
///   E  per-band random Gaussian level and impulse ratio, + deadlines
///   F  E + additive horizontal stripes on a second band range
enum class NoiseCase { A, B, C, D, E, F };

[[nodiscard]] NoiseCase parse_noise_case(const std::string& name);
[[nodiscard]] char noise_case_letter(NoiseCase c);

/// Inclusive, 0-based band range.
struct BandRange {
    Index first = 0;
    Index last = -1;

    [[nodiscard]] bool empty() const { return last < first; }
};

/// Sub-seed streams used by apply_noise; exposed so the stages can be
/// replayed one at a time.
enum class NoiseStream : std::uint64_t { Gaussian = 0, Impulse = 1, Deadlines = 2, Stripes = 3, Levels = 4 };

[[nodiscard]] std::uint64_t noise_stream_seed(std::uint64_t seed, NoiseStream s);

struct NoiseSpec {
    NoiseCase noise_case = NoiseCase::A;
    double gaussian_sigma = 0.1;  ///< fixed level for cases A-D
    double impulse_ratio = 0.0;   ///< fixed ratio for cases C, D
    double sigma_max = 0.2;       ///< cases E, F: per-band level ~ U(0, sigma_max)
    double impulse_max = 0.2;     ///< cases E, F: per-band ratio ~ U(0, impulse_max)
    BandRange deadline_bands;
    BandRange stripe_bands;
    int deadline_count_min = 3;
    int deadline_count_max = 10;
    int deadline_width_min = 1;
    int deadline_width_max = 3;
    int stripe_count_min = 20;
    int stripe_count_max = 40;
    double stripe_amplitude = 0.2;
    /// Read gaussian levels as variances (sigma = sqrt(level)) instead of
    /// standard deviations.
    bool strict_variance = false;
    std::uint64_t seed = 0;

    /// Defaults for a case on a cube with `bands` bands. Deadline and stripe
    /// ranges are the 224-band ranges 91-130 and 161-190 scaled to `bands`.
    static NoiseSpec preset(NoiseCase c, Index bands, std::uint64_t seed);

    /// Throws std::invalid_argument for ratios outside [0, 1] or band
    /// ranges outside the cube.
    void validate(Dims dims) const;
};

/// Adds zero-mean Gaussian noise; sigma[k] applies to band k.
void add_gaussian(Matrix& x, const std::vector<double>& sigma, std::uint64_t seed);

/// Sets round(ratio[k] * h * w) distinct voxels of band k to 0 or 1 with
/// equal probability.
void add_impulse(Matrix& x, Dims dims, const std::vector<double>& ratio, std::uint64_t seed);

/// Zeroes 1-3 column-wide, full-height segments, 3-10 per band, on `bands`.
void add_deadlines(HsiTensor& x, BandRange bands, const NoiseSpec& spec, std::uint64_t seed);

/// Adds +-amplitude to 20-40 distinct full-width rows per band on `bands`.
void add_stripes(HsiTensor& x, BandRange bands, const NoiseSpec& spec, std::uint64_t seed);

/// Applies the full scenario. The result is not clipped.
[[nodiscard]] HsiTensor apply_noise(const HsiTensor& x, const NoiseSpec& spec);

}  // namespace e3dtv
