#include "srlood/tensor.hpp"

#include <cmath>
#include <string>

namespace srlood {

namespace {

std::size_t checked_numel(const std::vector<std::size_t>& shape) {
    if (shape.size() > 3) {
        throw ValidationError("bad-shape", "tensor rank must be at most 3, got " + std::to_string(shape.size()));
    }
    std::size_t n = 1;
    for (std::size_t e : shape) {
        if (e == 0) {
            throw ValidationError("bad-shape", "zero extent in tensor shape");
        }
        n *= e;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    data_.assign(checked_numel(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_numel(shape_) != data_.size()) {
        throw ValidationError("bad-shape", "data length does not match product of extents");
    }
}

Tensor Tensor::scalar(double v) {
    Tensor t;
    t.data_.assign(1, v);
    return t;
}

std::size_t Tensor::extent(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ValidationError("bad-shape", "axis out of range");
    }
    return shape_[axis];
}

double Tensor::item() const {
    if (rank() != 0) {
        throw ValidationError("non-scalar", "item() on a tensor of rank " + std::to_string(rank()));
    }
    return data_[0];
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

}  // namespace srlood
