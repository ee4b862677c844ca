#include "roomrec/audio/framing.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "roomrec/error.hpp"

namespace roomrec::audio {

std::vector<double> gen_chirp(const ChirpConfig &cfg) {
    cfg.validate();
    // 2 ms at 44.1 kHz is 88.2 samples; the epsilon keeps exact products from rounding down.
    const auto n = static_cast<std::size_t>(std::floor(cfg.chirp_ms * cfg.sample_rate_hz / 1000.0 + 1e-9));
    std::vector<double> out(n);
    const double w = 2.0 * std::numbers::pi * cfg.carrier_hz / cfg.sample_rate_hz;
    for (std::size_t i = 0; i < n; ++i) out[i] = cfg.amplitude * std::sin(w * static_cast<double>(i));
    return out;
}

RecordParts segment_record(const AudioRecord &rec, const FrameLayout &layout) {
    if (rec.size() != layout.total())
        throw FramingError("record has " + std::to_string(rec.size()) + " samples, layout expects " +
                           std::to_string(layout.total()));
    if (layout.echo_samples != kEchoSamples)
        throw FramingError("echo window must be " + std::to_string(kEchoSamples) + " samples");
    auto s = rec.samples();
    return RecordParts{
        s.subspan(0, layout.chirp_samples),
        s.subspan(layout.chirp_samples, layout.guard_samples),
        EchoFrame(s.subspan(layout.chirp_samples + layout.guard_samples, layout.echo_samples)),
    };
}

EchoFrame echo_frame(const AudioRecord &rec, const FrameLayout &layout) {
    return segment_record(rec, layout).echo;
}

}  // namespace roomrec::audio
