#include "neuromix/tensor.hpp"

#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>

#include "neuromix/error.hpp"

namespace neuromix {

std::size_t shape_size(const Shape& shape) {
    if (shape.empty()) return 0;
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

namespace {

void check_shape(const Shape& shape) {
    if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
    for (auto d : shape) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape));
    }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, const std::vector<double>& data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    check_shape(shape_);
    if (shape_size(shape_) != data_.size()) {
        throw DimensionError("shape " + shape_string(shape_) + " does not match " + std::to_string(data_.size()) +
                             " values");
    }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t n = rows.size();
    const std::size_t m = n ? rows.begin()->size() : 0;
    std::vector<double> values;
    values.reserve(n * m);
    for (const auto& r : rows) {
        if (r.size() != m) throw DimensionError("ragged rows in Tensor::matrix");
        values.insert(values.end(), r.begin(), r.end());
    }
    return Tensor({n, m}, std::move(values));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_string(shape_));
    }
    return shape_[axis];
}

double& Tensor::at(std::size_t r, std::size_t c) {
    assert(rank() == 2 && r < shape_[0] && c < shape_[1]);
    return data_[r * shape_[1] + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    assert(rank() == 2 && r < shape_[0] && c < shape_[1]);
    return data_[r * shape_[1] + c];
}

std::span<double> Tensor::row(std::size_t i) {
    const std::size_t stride = data_.size() / shape_[0];
    return std::span<double>(data_).subspan(i * stride, stride);
}

std::span<const double> Tensor::row(std::size_t i) const {
    const std::size_t stride = data_.size() / shape_[0];
    return std::span<const double>(data_).subspan(i * stride, stride);
}

bool Tensor::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor Tensor::reshaped(Shape shape) const {
    Tensor out = *this;
    out.reshape(std::move(shape));
    return out;
}

void Tensor::reshape(Shape shape) {
    check_shape(shape);
    if (shape_size(shape) != data_.size()) {
        throw DimensionError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    }
    shape_ = std::move(shape);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

}  // namespace neuromix
