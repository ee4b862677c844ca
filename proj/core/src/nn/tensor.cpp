#include "roomrec/nn/tensor.hpp"

#include <cmath>

#include "roomrec/error.hpp"

namespace roomrec::nn {

std::size_t shape_size(const Shape &shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape &shape) {
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += 'x';
        s += std::to_string(shape[i]);
    }
    return s.empty() ? "scalar" : s;
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_))
        throw ShapeError("tensor of shape " + shape_string(shape_) + " cannot hold " + std::to_string(data_.size()) +
                         " values");
}

template <typename T>
Tensor<T> Tensor<T>::reshape(Shape shape) const {
    if (shape_size(shape) != data_.size())
        throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    return Tensor(std::move(shape), data_);
}

template <typename T>
bool Tensor<T>::all_finite() const noexcept {
    for (T v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace roomrec::nn
