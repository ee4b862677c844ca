#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roomrec/nn/arch.hpp"
#include "roomrec/nn/tensor.hpp"

namespace roomrec::nn {

template <typename T>
struct NamedParam {
    std::string name;
    Tensor<T> value;
};

/// Parameters and forward/backward passes for a CnnArch. Conv kernels are stored as
/// F x KH x KW x C, dense kernels as {out, in}. Inputs are row-major H x W x C per sample.
template <typename T>
class Network {
  public:
    Network() = default;
    /// Allocates zero-valued parameters for `arch` (validated).
    explicit Network(CnnArch arch);

    /// Glorot-uniform kernels, zero biases.
    void init(std::uint64_t seed);

    [[nodiscard]] const CnnArch &arch() const noexcept { return arch_; }
    [[nodiscard]] std::vector<NamedParam<T>> &params() noexcept { return params_; }
    [[nodiscard]] const std::vector<NamedParam<T>> &params() const noexcept { return params_; }
    [[nodiscard]] std::size_t input_size() const noexcept { return arch_.input.size(); }
    [[nodiscard]] std::size_t num_classes() const noexcept { return arch_.num_classes; }

    /// Output of the final dense layer (pre-softmax), N x K, inference mode.
    [[nodiscard]] std::vector<T> logits(std::span<const T> inputs, std::size_t n) const;

    /// Mean softmax cross-entropy over the batch. When `grads` is given it receives the
    /// batch-averaged gradient of every parameter (same order as params()). Dropout is active
    /// only when `dropout_seed` is set; equal seeds reproduce the same masks.
    T loss_and_gradients(std::span<const T> inputs, std::span<const int> labels,
                         std::optional<std::uint64_t> dropout_seed, std::vector<Tensor<T>> *grads) const;

    /// Zero tensors shaped like params().
    [[nodiscard]] std::vector<Tensor<T>> zero_gradients() const;

    template <typename U>
    [[nodiscard]] Network<U> cast() const {
        Network<U> out(arch_);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto src = params_[i].value.data();
            auto dst = out.params()[i].value.data();
            for (std::size_t j = 0; j < src.size(); ++j) dst[j] = static_cast<U>(src[j]);
        }
        return out;
    }

  private:
    struct Step {
        LayerKind kind = LayerKind::dense;
        Dims in, out;
        std::size_t pad_top = 0, pad_left = 0;
        bool relu = false;
        double rate = 0.0;
        std::size_t weight = 0, bias = 0;  // indices into params_
    };
    struct Trace;

    Trace forward(std::span<const T> inputs, std::size_t n, std::optional<std::uint64_t> dropout_seed) const;

    CnnArch arch_;
    std::vector<NamedParam<T>> params_;
    std::vector<Step> plan_;
    std::size_t logits_layer_ = 0;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace roomrec::nn
