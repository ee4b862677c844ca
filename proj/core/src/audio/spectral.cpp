#include "roomrec/audio/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "roomrec/audio/fft.hpp"
#include "roomrec/error.hpp"

namespace roomrec::audio {

std::vector<double> sliding_correlation(const EchoFrame &frame, double template_hz, std::size_t window_samples,
                                        double sample_rate_hz) {
    auto x = frame.samples();
    if (window_samples == 0 || window_samples > x.size())
        throw ArgumentError("correlation window of " + std::to_string(window_samples) +
                            " samples does not fit a frame of " + std::to_string(x.size()));

    std::vector<double> tmpl(window_samples);
    const double w = 2.0 * std::numbers::pi * template_hz / sample_rate_hz;
    double tmpl_energy = 0.0;
    for (std::size_t i = 0; i < window_samples; ++i) {
        tmpl[i] = std::sin(w * static_cast<double>(i));
        tmpl_energy += tmpl[i] * tmpl[i];
    }
    const double tmpl_norm = std::sqrt(tmpl_energy);

    std::vector<double> out(x.size() - window_samples + 1);
    for (std::size_t s = 0; s < out.size(); ++s) {
        double dot = 0.0;
        double energy = 0.0;
        for (std::size_t i = 0; i < window_samples; ++i) {
            dot += x[s + i] * tmpl[i];
            energy += x[s + i] * x[s + i];
        }
        if (energy == 0.0 || tmpl_norm == 0.0) {
            out[s] = 0.0;
            continue;
        }
        out[s] = std::clamp(dot / (std::sqrt(energy) * tmpl_norm), -1.0, 1.0);
    }
    return out;
}

LongPsd long_psd(std::span<const EchoFrame> frames) {
    if (frames.size() != kLongPsdFrames)
        throw ArgumentError("long_psd needs exactly " + std::to_string(kLongPsdFrames) + " echo frames, got " +
                            std::to_string(frames.size()));
    std::vector<double> joined;
    joined.reserve(kLongPsdFrames * kEchoSamples);
    for (const auto &f : frames) joined.insert(joined.end(), f.samples().begin(), f.samples().end());

    const std::size_t n = joined.size();
    auto power = power_spectrum(joined, n);
    const double scale = 1.0 / (kSampleRateHz * static_cast<double>(n));
    for (std::size_t k = 0; k < power.size(); ++k) {
        const bool edge = (k == 0) || (n % 2 == 0 && k == n / 2);
        power[k] *= edge ? scale : 2.0 * scale;
    }
    return LongPsd{std::move(power), kSampleRateHz / static_cast<double>(n), n};
}

PsdSegment psd_narrowband(const EchoFrame &frame, const BandSelection &band) {
    if (!(band.low_hz < band.high_hz)) throw ConfigError("band low edge must be below the high edge");
    const double df = kSampleRateHz / static_cast<double>(kNarrowbandFftLen);
    const auto k_lo = static_cast<std::size_t>(std::ceil(band.low_hz / df));
    const auto k_hi = static_cast<std::size_t>(std::floor(band.high_hz / df));
    if (k_hi >= kNarrowbandFftLen / 2 + 1 || k_lo > k_hi) throw ConfigError("band outside the analysable range");

    auto power = power_spectrum(frame.samples(), kNarrowbandFftLen);
    const double scale = 2.0 / (kSampleRateHz * static_cast<double>(kEchoSamples));
    PsdSegment seg;
    seg.values.reserve(k_hi - k_lo + 1);
    seg.bin_hz.reserve(k_hi - k_lo + 1);
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        seg.values.push_back(power[k] * scale);
        seg.bin_hz.push_back(static_cast<double>(k) * df);
    }
    return seg;
}

std::vector<double> hann_periodic(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n)));
    return w;
}

std::vector<std::size_t> contained_bins(const BandSelection &band, std::size_t n_fft, double sample_rate_hz) {
    const double df = sample_rate_hz / static_cast<double>(n_fft);
    std::vector<std::size_t> bins;
    for (std::size_t k = 0; k <= n_fft / 2; ++k) {
        const double lo = (static_cast<double>(k) - 0.5) * df;
        const double hi = (static_cast<double>(k) + 0.5) * df;
        if (lo >= band.low_hz && hi <= band.high_hz) bins.push_back(k);
    }
    return bins;
}

Spectrogram spectrogram(const EchoFrame &frame, const BandSelection &band) {
    static const std::vector<double> window = hann_periodic(kStftLen);
    const auto bins = contained_bins(band, kStftLen, kSampleRateHz);
    if (bins.size() != kSpectrogramBins)
        throw ConfigError("band selects " + std::to_string(bins.size()) + " STFT bins, expected " +
                          std::to_string(kSpectrogramBins));

    const auto x = frame.samples();
    const std::size_t frames = (x.size() - kStftLen) / kStftHop + 1;  // 32 for 4300 samples
    Spectrogram spec;
    std::vector<double> buf(kStftLen);
    for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t i = 0; i < kStftLen; ++i) buf[i] = x[t * kStftHop + i] * window[i];
        const auto power = power_spectrum(buf, kStftLen);
        for (std::size_t f = 0; f < kSpectrogramBins; ++f)
            spec.at(t, f) = 10.0 * std::log10(power[bins[f]] + kLogFloor);
    }
    for (std::size_t f = 0; f < kSpectrogramBins; ++f)
        spec.bin_hz[f] = static_cast<double>(bins[f]) * kSampleRateHz / static_cast<double>(kStftLen);
    return spec;
}

void write_csv(std::ostream &out, const Spectrogram &spec) {
    out << "t_index,f_hz,value\n";
    for (std::size_t t = 0; t < kSpectrogramFrames; ++t)
        for (std::size_t f = 0; f < kSpectrogramBins; ++f)
            out << t << ',' << spec.bin_hz[f] << ',' << spec.at(t, f) << '\n';
}

void write_csv(std::ostream &out, const PsdSegment &psd) {
    out << "f_hz,value\n";
    for (std::size_t k = 0; k < psd.values.size(); ++k) out << psd.bin_hz[k] << ',' << psd.values[k] << '\n';
}

}  // namespace roomrec::audio
