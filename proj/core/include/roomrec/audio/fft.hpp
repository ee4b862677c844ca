#pragma once

#include <complex>
#include <span>
#include <vector>

namespace roomrec::audio {

/// Full-length DFT of a real sequence, any length >= 1. X[k] = sum_n x[n] e^{-2 pi i k n / N}.
std::vector<std::complex<double>> fft(std::span<const double> x);

/// Non-redundant half of the DFT of a real sequence (N/2 + 1 bins).
std::vector<std::complex<double>> rfft(std::span<const double> x);

/// |X[k]|^2 for k in [0, N/2] of the real sequence `x` zero-padded to `n_fft`.
/// `x.size()` must not exceed `n_fft`.
std::vector<double> power_spectrum(std::span<const double> x, std::size_t n_fft);

}  // namespace roomrec::audio
