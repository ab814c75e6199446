#pragma once

#include "e3dtv/tensor.hpp"

#include <ostream>
#include <vector>

namespace e3dtv {

struct BandMetric {
    std::vector<double> per_band;
    double mean = 0.0;
};

/// Per-band PSNR in dB for data on [0, 1] (peak 1), capped at 100 dB.
[[nodiscard]] BandMetric psnr(const HsiTensor& ref, const HsiTensor& est);

inline constexpr double kPsnrCap = 100.0;

/// Per-band SSIM with an 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2 and C2 = 0.03^2, averaged over the fully-covered ("valid")
/// window positions. Bands smaller than 11 pixels use the largest odd window
/// that fits.
[[nodiscard]] BandMetric ssim(const HsiTensor& ref, const HsiTensor& est);

/// 100 * ratio_scale * sqrt(mean_k (RMSE_k / mean(ref_k))^2). Lower is better.
/// Throws std::domain_error if a reference band has zero mean.
[[nodiscard]] double ergas(const HsiTensor& ref, const HsiTensor& est, double ratio_scale = 1.0);

struct QualityReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
    double ergas = 0.0;
    std::vector<double> band_psnr;
    std::vector<double> band_ssim;

    /// CSV: header, one row per band (1-based band,psnr,ssim), then a summary row
    /// "mean,<psnr>,<ssim>,<ergas>".
    void write_csv(std::ostream& os) const;
};

[[nodiscard]] QualityReport evaluate_quality(const HsiTensor& ref, const HsiTensor& est);

}  // namespace e3dtv
