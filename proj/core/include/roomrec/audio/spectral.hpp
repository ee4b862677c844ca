#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "roomrec/audio/types.hpp"

namespace roomrec::audio {

inline constexpr std::size_t kLongPsdFrames = 40;
inline constexpr std::size_t kNarrowbandFftLen = 6480;
inline constexpr std::size_t kStftLen = 256;
inline constexpr std::size_t kStftHop = 128;
inline constexpr double kLogFloor = 1e-12;

/// Normalized correlation of every stride-1 window of `frame` against a sine template
/// of `template_hz`. Values lie in [-1, 1]; a window with zero energy scores 0.
std::vector<double> sliding_correlation(const EchoFrame &frame, double template_hz = 20000.0,
                                        std::size_t window_samples = kChirpSamples,
                                        double sample_rate_hz = kSampleRateHz);

/// One-sided power spectral density of a concatenated run of echo frames.
struct LongPsd {
    std::vector<double> values;  ///< N/2 + 1 bins
    double bin_hz = 0.0;
    std::size_t input_points = 0;

    [[nodiscard]] double frequency(std::size_t k) const { return static_cast<double>(k) * bin_hz; }
};

/// Concatenates exactly 40 echo frames (172,000 points) and returns their periodogram.
LongPsd long_psd(std::span<const EchoFrame> frames);

/// Short-time PSD of one echo frame restricted to `band`: the frame is zero-padded to
/// 6480 points so that bins 2866..3012 (147 values) fall inside [19.5, 20.5] kHz.
PsdSegment psd_narrowband(const EchoFrame &frame, const BandSelection &band = {});

/// 32 x 5 log-power spectrogram: periodic-Hann 256-point frames with hop 128, keeping the
/// DFT bins whose whole extent lies inside `band`.
Spectrogram spectrogram(const EchoFrame &frame, const BandSelection &band = {});

/// Indices of STFT bins fully contained in `band` for an `n_fft`-point transform.
std::vector<std::size_t> contained_bins(const BandSelection &band, std::size_t n_fft, double sample_rate_hz);

/// periodic Hann: w[n] = 0.5 (1 - cos(2 pi n / N))
std::vector<double> hann_periodic(std::size_t n);

void write_csv(std::ostream &out, const Spectrogram &spec);
void write_csv(std::ostream &out, const PsdSegment &psd);

}  // namespace roomrec::audio
