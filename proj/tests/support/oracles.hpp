#pragma once
// Straightforward reference implementations used to check the optimised library code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "roomrec/nn/tensor.hpp"

namespace testsupport {

/// O(N^2) DFT with long-double twiddles.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double> &x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        long double re = 0, im = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const long double ang = -2.0L * std::numbers::pi_v<long double> *
                                    static_cast<long double>((k * t) % n) / static_cast<long double>(n);
            re += x[t] * std::cos(ang);
            im += x[t] * std::sin(ang);
        }
        out[k] = {static_cast<double>(re), static_cast<double>(im)};
    }
    return out;
}

/// Same-padded (floor((K-1)/2) before) or valid stride-1 cross-correlation, H x W x C input,
/// F x KH x KW x C filters.
inline roomrec::nn::Tensor<double> naive_conv2d(const roomrec::nn::Tensor<double> &in,
                                                const roomrec::nn::Tensor<double> &k,
                                                const roomrec::nn::Tensor<double> &b, bool same) {
    const std::size_t H = in.dim(0), W = in.dim(1), C = in.dim(2);
    const std::size_t F = k.dim(0), KH = k.dim(1), KW = k.dim(2);
    const long pt = same ? static_cast<long>((KH - 1) / 2) : 0;
    const long pl = same ? static_cast<long>((KW - 1) / 2) : 0;
    const std::size_t OH = same ? H : H - KH + 1, OW = same ? W : W - KW + 1;
    roomrec::nn::Tensor<double> out({OH, OW, F});
    for (std::size_t oh = 0; oh < OH; ++oh)
        for (std::size_t ow = 0; ow < OW; ++ow)
            for (std::size_t f = 0; f < F; ++f) {
                double acc = b[f];
                for (std::size_t i = 0; i < KH; ++i)
                    for (std::size_t j = 0; j < KW; ++j) {
                        const long h = static_cast<long>(oh + i) - pt, w = static_cast<long>(ow + j) - pl;
                        if (h < 0 || w < 0 || h >= static_cast<long>(H) || w >= static_cast<long>(W)) continue;
                        for (std::size_t c = 0; c < C; ++c)
                            acc += in.at(static_cast<std::size_t>(h), static_cast<std::size_t>(w), c) *
                                   k[((f * KH + i) * KW + j) * C + c];
                    }
                out.at(oh, ow, f) = acc;
            }
    return out;
}

inline roomrec::nn::Tensor<double> naive_maxpool(const roomrec::nn::Tensor<double> &in, std::size_t ph,
                                                 std::size_t pw) {
    const std::size_t OH = in.dim(0) / ph, OW = in.dim(1) / pw, C = in.dim(2);
    roomrec::nn::Tensor<double> out({OH, OW, C});
    for (std::size_t oh = 0; oh < OH; ++oh)
        for (std::size_t ow = 0; ow < OW; ++ow)
            for (std::size_t c = 0; c < C; ++c) {
                double m = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < ph; ++i)
                    for (std::size_t j = 0; j < pw; ++j) m = std::max(m, in.at(oh * ph + i, ow * pw + j, c));
                out.at(oh, ow, c) = m;
            }
    return out;
}

/// Central difference d f / d x[i] with step h.
inline double central_difference(const std::function<double()> &f, double &xi, double h) {
    const double saved = xi;
    xi = saved + h;
    const double up = f();
    xi = saved - h;
    const double down = f();
    xi = saved;
    return (up - down) / (2.0 * h);
}

/// |a - b| / max(|a|, |b|, floor); the floor keeps near-zero gradients from dominating.
inline double rel_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testsupport
