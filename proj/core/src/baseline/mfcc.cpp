#include "roomrec/baseline/mfcc.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "roomrec/audio/fft.hpp"
#include "roomrec/error.hpp"

namespace roomrec::baseline {

namespace {

constexpr double kFloor = 1e-12;

}  // namespace

std::size_t MfccConfig::frame_len() const {
    return static_cast<std::size_t>(std::floor(frame_ms * sample_rate_hz / 1000.0 + 1e-9));
}

std::size_t MfccConfig::hop_len() const {
    return static_cast<std::size_t>(std::floor(hop_ms * sample_rate_hz / 1000.0 + 1e-9));
}

void MfccConfig::validate() const {
    const double nyquist = sample_rate_hz / 2.0;
    if (!(sample_rate_hz > 0)) throw ConfigError("sample rate must be positive");
    if (!(low_hz >= 0.0 && low_hz < high_hz && high_hz <= nyquist))
        throw ConfigError("mfcc band [" + std::to_string(low_hz) + ", " + std::to_string(high_hz) +
                          "] Hz must satisfy 0 <= low < high <= " + std::to_string(nyquist));
    if (num_filters == 0 || num_ceps == 0 || num_ceps > num_filters)
        throw ConfigError("need 0 < num_ceps <= num_filters");
    if (frame_len() == 0 || hop_len() == 0) throw ConfigError("frame and hop must span at least one sample");
    if (frame_len() > fft_len) throw ConfigError("frame longer than fft_len");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filterbank(const MfccConfig &cfg) {
    cfg.validate();
    const std::size_t bins = cfg.fft_len / 2 + 1;
    const double lo = hz_to_mel(cfg.low_hz), hi = hz_to_mel(cfg.high_hz);
    std::vector<double> edges(cfg.num_filters + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.num_filters + 1));

    std::vector<std::vector<double>> fb(cfg.num_filters, std::vector<double>(bins, 0.0));
    for (std::size_t m = 0; m < cfg.num_filters; ++m) {
        const double f0 = edges[m], f1 = edges[m + 1], f2 = edges[m + 2];
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * cfg.sample_rate_hz / static_cast<double>(cfg.fft_len);
            if (f > f0 && f <= f1)
                fb[m][k] = (f - f0) / (f1 - f0);
            else if (f > f1 && f < f2)
                fb[m][k] = (f2 - f) / (f2 - f1);
        }
    }
    return fb;
}

std::size_t mfcc_frames(std::size_t samples, const MfccConfig &cfg) {
    cfg.validate();
    const std::size_t len = cfg.frame_len();
    if (samples < len) return 0;
    return (samples - len) / cfg.hop_len() + 1;
}

std::vector<double> mfcc(const audio::EchoFrame &frame, const MfccConfig &cfg) {
    const auto fb = mel_filterbank(cfg);
    const std::size_t len = cfg.frame_len(), hop = cfg.hop_len();
    const std::size_t frames = mfcc_frames(frame.size(), cfg);
    if (frames == 0) throw FramingError("echo window shorter than one mfcc frame");
    const std::size_t nf = cfg.num_filters;

    std::vector<double> out;
    out.reserve(frames * cfg.num_ceps);
    std::vector<double> logmel(nf);
    const auto x = frame.samples();
    for (std::size_t t = 0; t < frames; ++t) {
        auto p = audio::power_spectrum(x.subspan(t * hop, len), cfg.fft_len);
        for (auto &v : p) v /= static_cast<double>(cfg.fft_len);
        for (std::size_t m = 0; m < nf; ++m) {
            double e = 0;
            for (std::size_t k = 0; k < p.size(); ++k) e += fb[m][k] * p[k];
            logmel[m] = std::log(std::max(e, kFloor));
        }
        for (std::size_t c = 0; c < cfg.num_ceps; ++c) {
            double acc = 0;
            for (std::size_t m = 0; m < nf; ++m)
                acc += logmel[m] * std::cos(std::numbers::pi * static_cast<double>(c) *
                                            (2.0 * static_cast<double>(m) + 1.0) / (2.0 * static_cast<double>(nf)));
            const double scale = c == 0 ? std::sqrt(1.0 / static_cast<double>(nf)) : std::sqrt(2.0 / static_cast<double>(nf));
            out.push_back(acc * scale);
        }
    }
    return out;
}

}  // namespace roomrec::baseline
