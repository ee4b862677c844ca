#include "roomrec/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "roomrec/error.hpp"

namespace roomrec::nn {

template <typename T>
Tensor<T> conv2d(const Tensor<T> &input, const Tensor<T> &filters, const Tensor<T> &bias, Padding padding,
                 std::size_t stride) {
    if (input.rank() != 3) throw ShapeError("conv2d input must be H x W x C, got " + shape_string(input.shape()));
    if (filters.rank() != 4) throw ShapeError("conv2d filters must be F x KH x KW x C");
    const std::size_t h = input.dim(0), w = input.dim(1), c = input.dim(2);
    const std::size_t f = filters.dim(0), kh = filters.dim(1), kw = filters.dim(2);
    if (filters.dim(3) != c)
        throw ShapeError("filter depth " + std::to_string(filters.dim(3)) + " does not match " + std::to_string(c) +
                         " input channels");
    if (bias.size() != f) throw ShapeError("bias length must equal the filter count");
    if (stride == 0) throw ArgumentError("stride must be positive");

    kernels::ConvGeom g{h, w, c, kh, kw, stride, 0, 0, 0, 0};
    if (padding == Padding::same) {
        g.oh = (h + stride - 1) / stride;
        g.ow = (w + stride - 1) / stride;
        const std::size_t pad_h = std::max<long>(0, static_cast<long>((g.oh - 1) * stride + kh) - static_cast<long>(h));
        const std::size_t pad_w = std::max<long>(0, static_cast<long>((g.ow - 1) * stride + kw) - static_cast<long>(w));
        g.pad_top = pad_h / 2;
        g.pad_left = pad_w / 2;
    } else {
        if (kh > h || kw > w) throw ShapeError("kernel larger than input for valid padding");
        g.oh = (h - kh) / stride + 1;
        g.ow = (w - kw) / stride + 1;
    }
    std::vector<T> col(g.oh * g.ow * g.patch());
    kernels::im2col(input.data().data(), 1, g, col.data());
    Tensor<T> out({g.oh, g.ow, f});
    kernels::linear_forward(col.data(), filters.data().data(), bias.data().data(), out.data().data(), g.oh * g.ow,
                            g.patch(), f, false);
    return out;
}

template <typename T>
Tensor<T> relu(const Tensor<T> &x) {
    Tensor<T> out = x;
    for (auto &v : out.data()) v = std::max(v, T{0});
    return out;
}

template <typename T>
Tensor<T> maxpool(const Tensor<T> &x, std::size_t window_h, std::size_t window_w) {
    if (x.rank() != 3) throw ShapeError("maxpool input must be H x W x C");
    if (window_h == 0 || window_w == 0) throw ArgumentError("pool window must be positive");
    if (window_h > x.dim(0) || window_w > x.dim(1))
        throw ShapeError("pool window " + std::to_string(window_h) + "x" + std::to_string(window_w) +
                         " larger than input " + shape_string(x.shape()));
    Tensor<T> out({x.dim(0) / window_h, x.dim(1) / window_w, x.dim(2)});
    kernels::maxpool_forward(x.data().data(), 1, x.dim(0), x.dim(1), x.dim(2), window_h, window_w, out.data().data(),
                             static_cast<std::uint32_t *>(nullptr));
    return out;
}

template <typename T>
Tensor<T> flatten(const Tensor<T> &x) {
    return x.reshape({x.size()});
}

template <typename T>
Tensor<T> dense(const Tensor<T> &x, const Tensor<T> &weights, const Tensor<T> &bias) {
    if (weights.rank() != 2) throw ShapeError("dense weights must be {out, in}");
    if (weights.dim(1) != x.size())
        throw ShapeError("dense weights expect " + std::to_string(weights.dim(1)) + " inputs, got " +
                         std::to_string(x.size()));
    if (bias.size() != weights.dim(0)) throw ShapeError("dense bias length must equal the output count");
    Tensor<T> out({weights.dim(0)});
    kernels::linear_forward(x.data().data(), weights.data().data(), bias.data().data(), out.data().data(), 1,
                            x.size(), weights.dim(0), false);
    return out;
}

template <typename T>
Tensor<T> dropout(const Tensor<T> &x, double rate, Mode mode, std::mt19937_64 &rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout rate must lie in [0, 1)");
    if (mode == Mode::inference || rate == 0.0) return x;
    Tensor<T> out = x;
    std::bernoulli_distribution drop(rate);
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
    for (auto &v : out.data()) v = drop(rng) ? T{0} : v * scale;
    return out;
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
    if (logits.empty()) throw ArgumentError("softmax of an empty vector");
    const T mx = *std::max_element(logits.begin(), logits.end());
    std::vector<T> p(logits.size());
    T sum{};
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto &v : p) v /= sum;
    return p;
}

template <typename T>
SoftmaxXent<T> softmax_xent(std::span<const T> logits, std::size_t label) {
    if (logits.size() < 2) throw ArgumentError("softmax_xent needs at least two classes");
    if (label >= logits.size())
        throw ArgumentError("label " + std::to_string(label) + " outside [0, " + std::to_string(logits.size()) + ")");
    const T mx = *std::max_element(logits.begin(), logits.end());
    T sum{};
    for (T v : logits) sum += std::exp(v - mx);
    const T log_sum = std::log(sum);
    SoftmaxXent<T> r;
    r.probs.resize(logits.size());
    r.grad.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        r.probs[i] = std::exp(logits[i] - mx - log_sum);
        r.grad[i] = r.probs[i] - (i == label ? T{1} : T{0});
    }
    r.loss = -(logits[label] - mx - log_sum);
    return r;
}

#define ROOMREC_INSTANTIATE_OPS(T)                                                                              \
    template Tensor<T> conv2d(const Tensor<T> &, const Tensor<T> &, const Tensor<T> &, Padding, std::size_t); \
    template Tensor<T> relu(const Tensor<T> &);                                                               \
    template Tensor<T> maxpool(const Tensor<T> &, std::size_t, std::size_t);                                  \
    template Tensor<T> flatten(const Tensor<T> &);                                                            \
    template Tensor<T> dense(const Tensor<T> &, const Tensor<T> &, const Tensor<T> &);                        \
    template Tensor<T> dropout(const Tensor<T> &, double, Mode, std::mt19937_64 &);                           \
    template std::vector<T> softmax(std::span<const T>);                                                      \
    template SoftmaxXent<T> softmax_xent(std::span<const T>, std::size_t);

ROOMREC_INSTANTIATE_OPS(float)
ROOMREC_INSTANTIATE_OPS(double)

}  // namespace roomrec::nn
