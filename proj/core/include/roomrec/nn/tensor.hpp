#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace roomrec::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape &shape) noexcept;
std::string shape_string(const Shape &shape);

/// Dense row-major tensor. data().size() == product(shape()) always holds.
template <typename T>
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(Shape shape, T fill = T{}) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
    /// Throws ShapeError when `data` does not match `shape`.
    Tensor(Shape shape, std::vector<T> data);

    [[nodiscard]] const Shape &shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] std::size_t dim(std::size_t i) const { return shape_.at(i); }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
    [[nodiscard]] const std::vector<T> &values() const noexcept { return data_; }

    T &operator[](std::size_t i) noexcept { return data_[i]; }
    const T &operator[](std::size_t i) const noexcept { return data_[i]; }

    /// Element of a rank-3 tensor (H x W x C).
    T &at(std::size_t h, std::size_t w, std::size_t c) { return data_[(h * shape_[1] + w) * shape_[2] + c]; }
    const T &at(std::size_t h, std::size_t w, std::size_t c) const {
        return data_[(h * shape_[1] + w) * shape_[2] + c];
    }

    /// Same data under a new shape of equal size.
    [[nodiscard]] Tensor reshape(Shape shape) const;
    [[nodiscard]] bool all_finite() const noexcept;

    friend bool operator==(const Tensor &, const Tensor &) = default;

  private:
    Shape shape_;
    std::vector<T> data_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace roomrec::nn
