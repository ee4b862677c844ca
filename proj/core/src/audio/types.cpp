#include "roomrec/audio/types.hpp"

#include <cmath>
#include <string>

#include "roomrec/error.hpp"

namespace roomrec::audio {

void ChirpConfig::validate() const {
    if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be positive");
    if (!(carrier_hz > 0.0) || carrier_hz >= sample_rate_hz / 2.0)
        throw ConfigError("carrier_hz " + std::to_string(carrier_hz) + " must lie below Nyquist (" +
                          std::to_string(sample_rate_hz / 2.0) + " Hz)");
    if (!(amplitude > 0.0) || amplitude > 1.0) throw ConfigError("amplitude must lie in (0, 1]");
    if (!(chirp_ms > 0.0) || chirp_ms >= period_ms) throw ConfigError("chirp_ms must lie in (0, period_ms)");
}

namespace {

void check_samples(const std::vector<double> &s, std::size_t expected, const char *what) {
    if (s.size() != expected)
        throw FramingError(std::string(what) + " must hold " + std::to_string(expected) + " samples, got " +
                           std::to_string(s.size()));
    for (double v : s)
        if (!std::isfinite(v)) throw ArgumentError(std::string(what) + " contains a non-finite sample");
}

}  // namespace

AudioRecord::AudioRecord() : samples_(kRecordSamples, 0.0) {}

AudioRecord::AudioRecord(std::vector<double> samples) : samples_(std::move(samples)) {
    check_samples(samples_, kRecordSamples, "AudioRecord");
}

EchoFrame::EchoFrame() : samples_(kEchoSamples, 0.0) {}

EchoFrame::EchoFrame(std::vector<double> samples) : samples_(std::move(samples)) {
    check_samples(samples_, kEchoSamples, "EchoFrame");
}

EchoFrame::EchoFrame(std::span<const double> samples) : EchoFrame(std::vector<double>(samples.begin(), samples.end())) {}

}  // namespace roomrec::audio
