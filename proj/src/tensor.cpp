#include "e3dtv/tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace e3dtv {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw std::domain_error(std::string(what) + ": non-finite value encountered");
    }
}

HsiTensor::HsiTensor(Dims dims) : dims_(dims) {
    if (!dims.valid()) throw ShapeError("HsiTensor: dimensions must be positive");
    data_ = Matrix::Zero(dims.spatial(), dims.s);
}

HsiTensor::HsiTensor(Dims dims, Matrix unfolded) : dims_(dims), data_(std::move(unfolded)) {
    if (!dims.valid()) throw ShapeError("HsiTensor: dimensions must be positive");
    if (data_.rows() != dims.spatial() || data_.cols() != dims.s) {
        throw ShapeError("HsiTensor: unfolded matrix is " + std::to_string(data_.rows()) + "x" +
                         std::to_string(data_.cols()) + ", expected " +
                         std::to_string(dims.spatial()) + "x" + std::to_string(dims.s));
    }
    require_finite(data_, "HsiTensor");
}

HsiTensor HsiTensor::from_flat(Dims dims, std::span<const double> values) {
    if (!dims.valid()) throw ShapeError("HsiTensor: dimensions must be positive");
    if (static_cast<Index>(values.size()) != dims.size()) {
        throw ShapeError("HsiTensor: flat buffer has " + std::to_string(values.size()) +
                         " values, expected " + std::to_string(dims.size()));
    }
    Matrix m(dims.spatial(), dims.s);
    std::copy(values.begin(), values.end(), m.data());
    return {dims, std::move(m)};
}

const Matrix& unfold3(const HsiTensor& x) { return x.unfolded(); }

HsiTensor fold3(const Matrix& unfolded, Dims dims) { return {dims, unfolded}; }

}  // namespace e3dtv
