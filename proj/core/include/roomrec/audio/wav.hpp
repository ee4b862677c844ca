#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "roomrec/audio/types.hpp"

namespace roomrec::audio {

/// Raw PCM content of a RIFF/WAVE file after header validation.
struct WavInfo {
    std::uint16_t format_tag = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
    std::size_t frames = 0;
};

/// Parses a PCM 16-bit mono 44.1 kHz WAV image into consecutive 4410-sample records.
/// Throws FormatError naming the offending field.
std::vector<AudioRecord> decode_wav(std::span<const std::uint8_t> bytes);

/// Header-only inspection; throws FormatError on structural damage but not on unsupported formats.
WavInfo inspect_wav(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_wav(std::span<const AudioRecord> records);
std::vector<std::uint8_t> encode_wav_samples(std::span<const double> samples, std::uint16_t channels = 1,
                                             std::uint32_t sample_rate = 44100);

std::vector<AudioRecord> wav_read(const std::filesystem::path &path);
void wav_write(std::span<const AudioRecord> records, const std::filesystem::path &path);

}  // namespace roomrec::audio
