#pragma once

#include <span>
#include <vector>

#include "roomrec/audio/types.hpp"

namespace roomrec::audio {

/// amplitude * sin(2*pi*carrier*n/fs) for floor(chirp_ms * fs / 1000) samples.
std::vector<double> gen_chirp(const ChirpConfig &cfg);

struct RecordParts {
    std::span<const double> chirp;
    std::span<const double> guard;
    EchoFrame echo;
};

/// Splits a record into chirp / safeguard / echo slices. The spans alias `rec`.
/// Throws FramingError when the record length does not match the layout.
RecordParts segment_record(const AudioRecord &rec, const FrameLayout &layout = {});

/// Convenience: just the echo window of a record.
EchoFrame echo_frame(const AudioRecord &rec, const FrameLayout &layout = {});

}  // namespace roomrec::audio
