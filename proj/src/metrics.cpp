#include "e3dtv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace e3dtv {
namespace {

void require_same_shape(const HsiTensor& a, const HsiTensor& b, const char* who) {
    if (a.dims() != b.dims()) throw ShapeError(std::string(who) + ": tensors differ in shape");
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> k(static_cast<std::size_t>(size));
    const int half = size / 2;
    double sum = 0.0;
    for (int t = -half; t <= half; ++t) {
        const double v = std::exp(-0.5 * t * t / (sigma * sigma));
        k[static_cast<std::size_t>(t + half)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable 'valid' correlation of an h x w image with k (x) k.
Matrix filter_valid(const Matrix& img, const std::vector<double>& k) {
    const Index n = static_cast<Index>(k.size());
    const Index h = img.rows() - n + 1, w = img.cols() - n + 1;
    Matrix rows(h, img.cols());
    for (Index j = 0; j < img.cols(); ++j)
        for (Index i = 0; i < h; ++i) {
            double acc = 0.0;
            for (Index t = 0; t < n; ++t) acc += k[static_cast<std::size_t>(t)] * img(i + t, j);
            rows(i, j) = acc;
        }
    Matrix out(h, w);
    for (Index j = 0; j < w; ++j)
        for (Index i = 0; i < h; ++i) {
            double acc = 0.0;
            for (Index t = 0; t < n; ++t) acc += k[static_cast<std::size_t>(t)] * rows(i, j + t);
            out(i, j) = acc;
        }
    return out;
}

double band_ssim(const Matrix& x, const Matrix& y) {
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    int size = static_cast<int>(std::min<Index>({11, x.rows(), x.cols()}));
    if (size % 2 == 0) --size;
    const auto win = gaussian_window(size, 1.5);

    const Matrix mx = filter_valid(x, win);
    const Matrix my = filter_valid(y, win);
    const Matrix sxx = filter_valid(x.cwiseProduct(x), win) - mx.cwiseProduct(mx);
    const Matrix syy = filter_valid(y.cwiseProduct(y), win) - my.cwiseProduct(my);
    const Matrix sxy = filter_valid(x.cwiseProduct(y), win) - mx.cwiseProduct(my);

    const auto num = (2.0 * mx.array() * my.array() + c1) * (2.0 * sxy.array() + c2);
    const auto den = (mx.array().square() + my.array().square() + c1) * (sxx.array() + syy.array() + c2);
    return (num / den).mean();
}

}  // namespace

BandMetric psnr(const HsiTensor& ref, const HsiTensor& est) {
    require_same_shape(ref, est, "psnr");
    BandMetric out;
    const Matrix diff = ref.unfolded() - est.unfolded();
    for (Index k = 0; k < ref.s(); ++k) {
        const double mse = diff.col(k).squaredNorm() / static_cast<double>(ref.dims().spatial());
        const double v = mse == 0.0 ? kPsnrCap : std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
        out.per_band.push_back(v);
    }
    out.mean = mean_of(out.per_band);
    return out;
}

BandMetric ssim(const HsiTensor& ref, const HsiTensor& est) {
    require_same_shape(ref, est, "ssim");
    BandMetric out;
    for (Index k = 0; k < ref.s(); ++k) out.per_band.push_back(band_ssim(ref.band(k), est.band(k)));
    out.mean = mean_of(out.per_band);
    return out;
}

double ergas(const HsiTensor& ref, const HsiTensor& est, double ratio_scale) {
    require_same_shape(ref, est, "ergas");
    const double n = static_cast<double>(ref.dims().spatial());
    double acc = 0.0;
    for (Index k = 0; k < ref.s(); ++k) {
        const double mean = ref.unfolded().col(k).sum() / n;
        if (mean == 0.0) throw std::domain_error("ergas: reference band " + std::to_string(k) + " has zero mean");
        const double rmse = std::sqrt((ref.unfolded().col(k) - est.unfolded().col(k)).squaredNorm() / n);
        acc += (rmse / mean) * (rmse / mean);
    }
    return 100.0 * ratio_scale * std::sqrt(acc / static_cast<double>(ref.s()));
}

QualityReport evaluate_quality(const HsiTensor& ref, const HsiTensor& est) {
    QualityReport q;
    const BandMetric p = psnr(ref, est);
    const BandMetric s = ssim(ref, est);
    q.psnr_db = p.mean;
    q.ssim = s.mean;
    q.band_psnr = p.per_band;
    q.band_ssim = s.per_band;
    q.ergas = ergas(ref, est);
    return q;
}

void QualityReport::write_csv(std::ostream& os) const {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(10);
    os << "band,psnr_db,ssim,ergas\n";
    for (std::size_t k = 0; k < band_psnr.size(); ++k) {
        os << k + 1 << ',' << band_psnr[k] << ',' << band_ssim[k] << ",\n";
    }
    os << "mean," << psnr_db << ',' << ssim << ',' << ergas << '\n';
    os.flags(flags);
    os.precision(prec);
}

}  // namespace e3dtv
