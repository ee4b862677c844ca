// Batched dense/conv/pool kernels shared by the public ops and the network.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace roomrec::nn::kernels {

template <typename T>
inline T dot(const T *a, const T *b, std::size_t n) {
    T acc{};
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

template <typename T>
inline void axpy(T *y, T alpha, const T *x, std::size_t n) {
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

/// out[m][f] = b[f] + dot(w[f], in[m]); in: M x P, w: F x P, out: M x F.
template <typename T>
void linear_forward(const T *in, const T *w, const T *b, T *out, std::size_t m, std::size_t p, std::size_t f,
                    bool relu) {
    const std::size_t block = std::max<std::size_t>(1, 8192 / std::max<std::size_t>(p, 1));
    for (std::size_t m0 = 0; m0 < m; m0 += block) {
        const std::size_t m1 = std::min(m, m0 + block);
        for (std::size_t j = 0; j < f; ++j) {
            const T *wj = w + j * p;
            for (std::size_t i = m0; i < m1; ++i) out[i * f + j] = b[j] + dot(wj, in + i * p, p);
        }
    }
    if (relu)
        for (std::size_t i = 0; i < m * f; ++i) out[i] = std::max(out[i], T{0});
}

/// Accumulates dw (F x P), db (F) and, when din != nullptr, overwrites din (M x P) = dout * w.
template <typename T>
void linear_backward(const T *in, const T *w, const T *dout, T *dw, T *db, T *din, std::size_t m, std::size_t p,
                     std::size_t f) {
    const std::size_t block = std::max<std::size_t>(1, 8192 / std::max<std::size_t>(p, 1));
    for (std::size_t m0 = 0; m0 < m; m0 += block) {
        const std::size_t m1 = std::min(m, m0 + block);
        for (std::size_t j = 0; j < f; ++j) {
            T *dwj = dw + j * p;
            T bias_acc{};
            for (std::size_t i = m0; i < m1; ++i) {
                const T g = dout[i * f + j];
                bias_acc += g;
                if (g != T{0}) axpy(dwj, g, in + i * p, p);
            }
            db[j] += bias_acc;
        }
    }
    if (din == nullptr) return;
    std::fill(din, din + m * p, T{0});
    const std::size_t fblock = std::max<std::size_t>(1, 8192 / std::max<std::size_t>(p, 1));
    for (std::size_t j0 = 0; j0 < f; j0 += fblock) {
        const std::size_t j1 = std::min(f, j0 + fblock);
        for (std::size_t i = 0; i < m; ++i) {
            T *dini = din + i * p;
            for (std::size_t j = j0; j < j1; ++j) {
                const T g = dout[i * f + j];
                if (g != T{0}) axpy(dini, g, w + j * p, p);
            }
        }
    }
}

/// Convolution geometry for one layer.
struct ConvGeom {
    std::size_t h, w, c;     // input
    std::size_t kh, kw;      // kernel
    std::size_t stride;
    std::size_t pad_top, pad_left;
    std::size_t oh, ow;      // output

    [[nodiscard]] std::size_t patch() const noexcept { return kh * kw * c; }
};

/// Patch matrix (N*OH*OW) x (KH*KW*C) in (kh, kw, c) order, zero outside the input.
template <typename T>
void im2col(const T *x, std::size_t n, const ConvGeom &g, T *col) {
    const std::size_t p = g.patch();
    for (std::size_t s = 0; s < n; ++s) {
        const T *xs = x + s * g.h * g.w * g.c;
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
            for (std::size_t ox = 0; ox < g.ow; ++ox) {
                T *row = col + ((s * g.oh + oy) * g.ow + ox) * p;
                for (std::size_t ky = 0; ky < g.kh; ++ky) {
                    const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad_top);
                    for (std::size_t kx = 0; kx < g.kw; ++kx) {
                        const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad_left);
                        T *dst = row + (ky * g.kw + kx) * g.c;
                        if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.h) || ix >= static_cast<long>(g.w)) {
                            std::fill(dst, dst + g.c, T{0});
                        } else {
                            const T *src = xs + (static_cast<std::size_t>(iy) * g.w + static_cast<std::size_t>(ix)) * g.c;
                            std::copy(src, src + g.c, dst);
                        }
                    }
                }
            }
        }
    }
}

/// Scatter-add of a patch-matrix gradient back onto the input gradient (dx is overwritten).
template <typename T>
void col2im(const T *dcol, std::size_t n, const ConvGeom &g, T *dx) {
    const std::size_t p = g.patch();
    std::fill(dx, dx + n * g.h * g.w * g.c, T{0});
    for (std::size_t s = 0; s < n; ++s) {
        T *dxs = dx + s * g.h * g.w * g.c;
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
            for (std::size_t ox = 0; ox < g.ow; ++ox) {
                const T *row = dcol + ((s * g.oh + oy) * g.ow + ox) * p;
                for (std::size_t ky = 0; ky < g.kh; ++ky) {
                    const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad_top);
                    if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
                    for (std::size_t kx = 0; kx < g.kw; ++kx) {
                        const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad_left);
                        if (ix < 0 || ix >= static_cast<long>(g.w)) continue;
                        T *dst = dxs + (static_cast<std::size_t>(iy) * g.w + static_cast<std::size_t>(ix)) * g.c;
                        const T *src = row + (ky * g.kw + kx) * g.c;
                        for (std::size_t ch = 0; ch < g.c; ++ch) dst[ch] += src[ch];
                    }
                }
            }
        }
    }
}

/// Non-overlapping max pooling; trailing rows/cols that do not fill a window are dropped.
/// `argmax` receives, per output element, the flat index of the winning input element.
template <typename T>
void maxpool_forward(const T *x, std::size_t n, std::size_t h, std::size_t w, std::size_t c, std::size_t ph,
                     std::size_t pw, T *out, std::uint32_t *argmax) {
    const std::size_t oh = h / ph, ow = w / pw;
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t in_base = s * h * w * c;
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox)
                for (std::size_t ch = 0; ch < c; ++ch) {
                    std::size_t best = in_base + ((oy * ph) * w + ox * pw) * c + ch;
                    for (std::size_t dy = 0; dy < ph; ++dy)
                        for (std::size_t dx = 0; dx < pw; ++dx) {
                            const std::size_t idx = in_base + ((oy * ph + dy) * w + ox * pw + dx) * c + ch;
                            if (x[idx] > x[best]) best = idx;
                        }
                    const std::size_t o = ((s * oh + oy) * ow + ox) * c + ch;
                    out[o] = x[best];
                    if (argmax) argmax[o] = static_cast<std::uint32_t>(best);
                }
    }
}

template <typename T>
void maxpool_backward(const T *dout, const std::uint32_t *argmax, std::size_t out_count, T *dx, std::size_t in_count) {
    std::fill(dx, dx + in_count, T{0});
    for (std::size_t o = 0; o < out_count; ++o) dx[argmax[o]] += dout[o];
}

}  // namespace roomrec::nn::kernels
