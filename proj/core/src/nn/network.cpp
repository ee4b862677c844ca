#include "roomrec/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kernels.hpp"
#include "roomrec/error.hpp"

namespace roomrec::nn {

template <typename T>
struct Network<T>::Trace {
    std::size_t n = 0;
    std::vector<std::vector<T>> acts;  // acts[i] feeds layer i; acts[i + 1] is its output
    std::vector<std::vector<T>> cols;
    std::vector<std::vector<std::uint32_t>> argmax;
    std::vector<std::vector<T>> masks;  // dropout scale factors (0 or 1/(1-rate))
};

namespace {

std::size_t same_pad_before(std::size_t in, std::size_t k, std::size_t stride) {
    const std::size_t out = (in + stride - 1) / stride;
    const long total = static_cast<long>((out - 1) * stride + k) - static_cast<long>(in);
    return total > 0 ? static_cast<std::size_t>(total / 2) : 0;
}

template <typename StepT>
kernels::ConvGeom geometry(const StepT &s, const LayerSpec &l) {
    return {s.in.h, s.in.w, s.in.c, l.kernel_h, l.kernel_w, l.stride, s.pad_top, s.pad_left, s.out.h, s.out.w};
}

}  // namespace

template <typename T>
Network<T>::Network(CnnArch arch) : arch_(std::move(arch)) {
    arch_.validate();
    const auto dims = arch_.output_dims();
    Dims in = arch_.input;
    for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
        const auto &l = arch_.layers[i];
        Step s;
        s.kind = l.kind;
        s.in = in;
        s.out = dims[i];
        s.relu = l.relu;
        s.rate = l.rate;
        const std::string base = l.name.empty() ? std::string(to_string(l.kind)) + std::to_string(i) : l.name;
        if (l.kind == LayerKind::conv) {
            if (l.padding == Padding::same) {
                s.pad_top = same_pad_before(in.h, l.kernel_h, l.stride);
                s.pad_left = same_pad_before(in.w, l.kernel_w, l.stride);
            }
            s.weight = params_.size();
            params_.push_back({base + "/kernel", Tensor<T>({l.filters, l.kernel_h, l.kernel_w, in.c})});
            s.bias = params_.size();
            params_.push_back({base + "/bias", Tensor<T>({l.filters})});
        } else if (l.kind == LayerKind::dense) {
            s.weight = params_.size();
            params_.push_back({base + "/kernel", Tensor<T>({l.units, in.size()})});
            s.bias = params_.size();
            params_.push_back({base + "/bias", Tensor<T>({l.units})});
            logits_layer_ = i;
        }
        plan_.push_back(s);
        in = dims[i];
    }
}

template <typename T>
void Network<T>::init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (const auto &s : plan_) {
        if (s.kind != LayerKind::conv && s.kind != LayerKind::dense) continue;
        auto &w = params_[s.weight].value;
        double fan_in = 0, fan_out = 0;
        if (s.kind == LayerKind::conv) {
            const double receptive = static_cast<double>(w.dim(1) * w.dim(2));
            fan_in = receptive * static_cast<double>(w.dim(3));
            fan_out = receptive * static_cast<double>(w.dim(0));
        } else {
            fan_in = static_cast<double>(w.dim(1));
            fan_out = static_cast<double>(w.dim(0));
        }
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (auto &v : w.data()) v = static_cast<T>(dist(rng));
        for (auto &v : params_[s.bias].value.data()) v = T{0};
    }
}

template <typename T>
std::vector<Tensor<T>> Network<T>::zero_gradients() const {
    std::vector<Tensor<T>> g;
    g.reserve(params_.size());
    for (const auto &p : params_) g.emplace_back(p.value.shape());
    return g;
}

template <typename T>
typename Network<T>::Trace Network<T>::forward(std::span<const T> inputs, std::size_t n,
                                               std::optional<std::uint64_t> dropout_seed) const {
    if (plan_.empty()) throw ShapeError("network has no layers");
    if (inputs.size() != n * arch_.input.size())
        throw ShapeError("expected " + std::to_string(n) + " x " + std::to_string(arch_.input.size()) +
                         " inputs, got " + std::to_string(inputs.size()));
    Trace tr;
    tr.n = n;
    const std::size_t layers = logits_layer_ + 1;
    tr.acts.resize(layers + 1);
    tr.cols.resize(layers);
    tr.argmax.resize(layers);
    tr.masks.resize(layers);
    tr.acts[0].assign(inputs.begin(), inputs.end());
    std::mt19937_64 rng(dropout_seed.value_or(0));

    for (std::size_t i = 0; i < layers; ++i) {
        const Step &s = plan_[i];
        const auto &in = tr.acts[i];
        auto &out = tr.acts[i + 1];
        switch (s.kind) {
        case LayerKind::conv: {
            const auto g = geometry(s, arch_.layers[i]);
            const std::size_t rows = n * g.oh * g.ow;
            auto &col = tr.cols[i];
            col.resize(rows * g.patch());
            kernels::im2col(in.data(), n, g, col.data());
            out.resize(rows * s.out.c);
            kernels::linear_forward(col.data(), params_[s.weight].value.data().data(),
                                    params_[s.bias].value.data().data(), out.data(), rows, g.patch(), s.out.c, s.relu);
            break;
        }
        case LayerKind::maxpool:
            out.resize(n * s.out.size());
            tr.argmax[i].resize(out.size());
            kernels::maxpool_forward(in.data(), n, s.in.h, s.in.w, s.in.c, arch_.layers[i].kernel_h,
                                     arch_.layers[i].kernel_w, out.data(), tr.argmax[i].data());
            break;
        case LayerKind::flatten: out = in; break;
        case LayerKind::dense:
            out.resize(n * s.out.c);
            kernels::linear_forward(in.data(), params_[s.weight].value.data().data(),
                                    params_[s.bias].value.data().data(), out.data(), n, s.in.size(), s.out.c, s.relu);
            break;
        case LayerKind::dropout:
            if (dropout_seed && s.rate > 0.0) {
                auto &mask = tr.masks[i];
                mask.resize(in.size());
                std::bernoulli_distribution keep(1.0 - s.rate);
                const T scale = static_cast<T>(1.0 / (1.0 - s.rate));
                for (auto &m : mask) m = keep(rng) ? scale : T{0};
                out.resize(in.size());
                for (std::size_t j = 0; j < in.size(); ++j) out[j] = in[j] * mask[j];
            } else {
                out = in;
            }
            break;
        case LayerKind::softmax: out = in; break;
        }
    }
    return tr;
}

template <typename T>
std::vector<T> Network<T>::logits(std::span<const T> inputs, std::size_t n) const {
    auto tr = forward(inputs, n, std::nullopt);
    return std::move(tr.acts.back());
}

template <typename T>
T Network<T>::loss_and_gradients(std::span<const T> inputs, std::span<const int> labels,
                                 std::optional<std::uint64_t> dropout_seed, std::vector<Tensor<T>> *grads) const {
    const std::size_t n = labels.size();
    if (n == 0) throw ArgumentError("empty batch");
    auto tr = forward(inputs, n, dropout_seed);
    const std::size_t k = arch_.num_classes;
    const auto &z = tr.acts.back();

    std::vector<T> d(n * k);
    double loss = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        if (labels[s] < 0 || static_cast<std::size_t>(labels[s]) >= k)
            throw ArgumentError("label " + std::to_string(labels[s]) + " outside [0, " + std::to_string(k) + ")");
        const T *zs = z.data() + s * k;
        const T mx = *std::max_element(zs, zs + k);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += std::exp(static_cast<double>(zs[j] - mx));
        const double log_sum = std::log(sum);
        loss += log_sum - static_cast<double>(zs[labels[s]] - mx);
        for (std::size_t j = 0; j < k; ++j) {
            const double p = std::exp(static_cast<double>(zs[j] - mx) - log_sum);
            d[s * k + j] = static_cast<T>((p - (static_cast<std::size_t>(labels[s]) == j ? 1.0 : 0.0)) /
                                          static_cast<double>(n));
        }
    }
    loss /= static_cast<double>(n);
    if (grads == nullptr) return static_cast<T>(loss);

    *grads = zero_gradients();
    std::vector<T> din;
    for (std::size_t ii = logits_layer_ + 1; ii-- > 0;) {
        const Step &s = plan_[ii];
        const auto &in = tr.acts[ii];
        const auto &out = tr.acts[ii + 1];
        const bool need_din = ii > 0;
        switch (s.kind) {
        case LayerKind::conv: {
            const auto g = geometry(s, arch_.layers[ii]);
            const std::size_t rows = n * g.oh * g.ow;
            if (s.relu)
                for (std::size_t j = 0; j < d.size(); ++j)
                    if (out[j] <= T{0}) d[j] = T{0};
            std::vector<T> dcol(need_din ? rows * g.patch() : 0);
            kernels::linear_backward(tr.cols[ii].data(), params_[s.weight].value.data().data(), d.data(),
                                     (*grads)[s.weight].data().data(), (*grads)[s.bias].data().data(),
                                     need_din ? dcol.data() : nullptr, rows, g.patch(), s.out.c);
            if (need_din) {
                din.resize(in.size());
                kernels::col2im(dcol.data(), n, g, din.data());
            }
            break;
        }
        case LayerKind::maxpool:
            din.resize(in.size());
            kernels::maxpool_backward(d.data(), tr.argmax[ii].data(), d.size(), din.data(), din.size());
            break;
        case LayerKind::flatten:
        case LayerKind::softmax: din = d; break;
        case LayerKind::dense:
            if (s.relu)
                for (std::size_t j = 0; j < d.size(); ++j)
                    if (out[j] <= T{0}) d[j] = T{0};
            if (need_din) din.resize(in.size());
            kernels::linear_backward(in.data(), params_[s.weight].value.data().data(), d.data(),
                                     (*grads)[s.weight].data().data(), (*grads)[s.bias].data().data(),
                                     need_din ? din.data() : nullptr, n, s.in.size(), s.out.c);
            break;
        case LayerKind::dropout:
            din = d;
            if (!tr.masks[ii].empty())
                for (std::size_t j = 0; j < din.size(); ++j) din[j] *= tr.masks[ii][j];
            break;
        }
        if (need_din) d.swap(din);
    }
    return static_cast<T>(loss);
}

template class Network<float>;
template class Network<double>;

}  // namespace roomrec::nn
