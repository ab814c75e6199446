#include "e3dtv/difference.hpp"

#include <string>

namespace e3dtv {
namespace {

void check_shape(const Matrix& m, Dims dims, const char* who) {
    if (!dims.valid() || m.rows() != dims.spatial() || m.cols() != dims.s) {
        throw ShapeError(std::string(who) + ": matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " +
                         std::to_string(dims.spatial()) + "x" + std::to_string(dims.s));
    }
}

// out(p) = in(p) - in(p shifted by `step` along mode), step = +1 forward, -1 backward.
Matrix shifted_difference(const Matrix& in, Dims dims, Mode mode, Index step) {
    const Index h = dims.h, w = dims.w, s = dims.s;
    Matrix out(in.rows(), in.cols());
    switch (mode) {
        case Mode::Height:
            for (Index k = 0; k < s; ++k) {
                for (Index j = 0; j < w; ++j) {
                    const double* col = in.col(k).data() + h * j;
                    double* dst = out.col(k).data() + h * j;
                    for (Index i = 0; i < h; ++i) {
                        dst[i] = col[i] - col[(i + step + h) % h];
                    }
                }
            }
            break;
        case Mode::Width:
            for (Index k = 0; k < s; ++k) {
                for (Index j = 0; j < w; ++j) {
                    const Index jn = (j + step + w) % w;
                    out.col(k).segment(h * j, h) =
                        in.col(k).segment(h * j, h) - in.col(k).segment(h * jn, h);
                }
            }
            break;
        case Mode::Spectral:
            for (Index k = 0; k < s; ++k) {
                out.col(k) = in.col(k) - in.col((k + step + s) % s);
            }
            break;
    }
    return out;
}

}  // namespace

Matrix diff(const Matrix& x, Dims dims, Mode mode) {
    check_shape(x, dims, "diff");
    return shifted_difference(x, dims, mode, +1);
}

Matrix diff_adjoint(const Matrix& g, Dims dims, Mode mode) {
    check_shape(g, dims, "diff_adjoint");
    return shifted_difference(g, dims, mode, -1);
}

HsiTensor diff(const HsiTensor& x, Mode mode) {
    return {x.dims(), diff(x.unfolded(), x.dims(), mode)};
}

HsiTensor diff_adjoint(const HsiTensor& g, Mode mode) {
    return {g.dims(), diff_adjoint(g.unfolded(), g.dims(), mode)};
}

GradientStack gradients(const HsiTensor& x) {
    return {diff(x, Mode::Height), diff(x, Mode::Width), diff(x, Mode::Spectral)};
}

}  // namespace e3dtv
