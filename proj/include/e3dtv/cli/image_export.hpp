#pragma once

#include "e3dtv/tensor.hpp"
#include "e3dtv/tensor_io.hpp"

#include <vector>

namespace e3dtv::cli {

/// Binary PGM (P5) of band k: values on [0, 1] map linearly to 0..255,
/// clipped. Row i of the image is spatial row i.
[[nodiscard]] Bytes encode_band_pgm(const HsiTensor& t, Index k);

/// Line plot of one or more equally long series as a PGM. Each series is
/// drawn in its own gray level on a white background with a black frame;
/// the y range spans all finite values.
[[nodiscard]] Bytes encode_series_plot_pgm(const std::vector<std::vector<double>>& series, int width = 320,
                                           int height = 200);

}  // namespace e3dtv::cli
