#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "roomrec/nn/arch.hpp"
#include "roomrec/nn/tensor.hpp"

namespace roomrec::nn {

enum class Mode { training, inference };

/// Stride-1 cross-correlation of an H x W x C image with F x KH x KW x C filters plus bias.
/// Same padding places floor((K-1)/2) zeros before and the rest after each spatial axis.
template <typename T>
Tensor<T> conv2d(const Tensor<T> &input, const Tensor<T> &filters, const Tensor<T> &bias,
                 Padding padding = Padding::same, std::size_t stride = 1);

template <typename T>
Tensor<T> relu(const Tensor<T> &x);

/// Non-overlapping max pooling over H x W x C; odd trailing rows/cols are dropped.
template <typename T>
Tensor<T> maxpool(const Tensor<T> &x, std::size_t window_h = 2, std::size_t window_w = 2);

template <typename T>
Tensor<T> flatten(const Tensor<T> &x);

/// W x + b with W of shape {out, in}.
template <typename T>
Tensor<T> dense(const Tensor<T> &x, const Tensor<T> &weights, const Tensor<T> &bias);

/// Inverted dropout: in training mode each element is zeroed with probability `rate` and
/// survivors are scaled by 1/(1-rate). Inference mode returns `x` unchanged.
template <typename T>
Tensor<T> dropout(const Tensor<T> &x, double rate, Mode mode, std::mt19937_64 &rng);

template <typename T>
struct SoftmaxXent {
    T loss{};
    std::vector<T> probs;
    std::vector<T> grad;  ///< d loss / d logits = probs - onehot(label)
};

/// Max-shifted softmax followed by -log(prob[label]).
template <typename T>
SoftmaxXent<T> softmax_xent(std::span<const T> logits, std::size_t label);

template <typename T>
std::vector<T> softmax(std::span<const T> logits);

}  // namespace roomrec::nn
