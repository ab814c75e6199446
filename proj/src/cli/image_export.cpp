#include "e3dtv/cli/image_export.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace e3dtv::cli {
namespace {

Bytes pgm_header(Index width, Index height) {
    const std::string head = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    return Bytes(head.begin(), head.end());
}

std::uint8_t to_gray(double v) {
    return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

}  // namespace

Bytes encode_band_pgm(const HsiTensor& t, Index k) {
    if (k < 0 || k >= t.s()) throw std::out_of_range("band " + std::to_string(k) + " outside the cube");
    Bytes out = pgm_header(t.w(), t.h());
    out.reserve(out.size() + static_cast<std::size_t>(t.h() * t.w()));
    for (Index i = 0; i < t.h(); ++i)
        for (Index j = 0; j < t.w(); ++j) out.push_back(to_gray(t(i, j, k)));
    return out;
}

Bytes encode_series_plot_pgm(const std::vector<std::vector<double>>& series, int width, int height) {
    if (width < 16 || height < 16) throw std::invalid_argument("plot too small");
    std::vector<std::uint8_t> img(static_cast<std::size_t>(width) * height, 255);
    auto put = [&](int x, int y, std::uint8_t g) {
        if (x >= 0 && x < width && y >= 0 && y < height) img[static_cast<std::size_t>(y) * width + x] = g;
    };

    const int margin = 6;
    for (int x = margin; x < width - margin; ++x) {
        put(x, margin, 0);
        put(x, height - margin - 1, 0);
    }
    for (int y = margin; y < height - margin; ++y) {
        put(margin, y, 0);
        put(width - margin - 1, y, 0);
    }

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t len = 0;
    for (const auto& s : series) {
        len = std::max(len, s.size());
        for (double v : s)
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    }
    if (len > 0 && std::isfinite(lo)) {
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
        const int x0 = margin + 2, x1 = width - margin - 3;
        const int y0 = margin + 2, y1 = height - margin - 3;
        auto px = [&](std::size_t i) {
            return len == 1 ? (x0 + x1) / 2
                            : x0 + static_cast<int>(std::lround(double(i) * (x1 - x0) / double(len - 1)));
        };
        auto py = [&](double v) { return y1 - static_cast<int>(std::lround((v - lo) / (hi - lo) * (y1 - y0))); };

        for (std::size_t n = 0; n < series.size(); ++n) {
            const auto gray = static_cast<std::uint8_t>(std::min<std::size_t>(n * 80, 200));
            const auto& s = series[n];
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (!std::isfinite(s[i])) continue;
                const int xa = px(i), ya = py(s[i]);
                put(xa, ya, gray);
                if (i + 1 < s.size() && std::isfinite(s[i + 1])) {
                    // Bresenham segment to the next sample.
                    int x = xa, y = ya;
                    const int xb = px(i + 1), yb = py(s[i + 1]);
                    const int dx = std::abs(xb - x), dy = -std::abs(yb - y);
                    const int sx = x < xb ? 1 : -1, sy = y < yb ? 1 : -1;
                    int err = dx + dy;
                    while (true) {
                        put(x, y, gray);
                        if (x == xb && y == yb) break;
                        const int e2 = 2 * err;
                        if (e2 >= dy) {
                            err += dy;
                            x += sx;
                        }
                        if (e2 <= dx) {
                            err += dx;
                            y += sy;
                        }
                    }
                }
            }
        }
    }

    Bytes out = pgm_header(width, height);
    out.insert(out.end(), img.begin(), img.end());
    return out;
}

}  // namespace e3dtv::cli
