#include "roomrec/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "roomrec/error.hpp"

namespace roomrec::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put_u16(std::vector<std::uint8_t> &b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v & 0xff));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t> &b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_tag(std::vector<std::uint8_t> &b, const char *tag) { b.insert(b.end(), tag, tag + 4); }

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char *tag) {
    return std::memcmp(b.data() + at, tag, 4) == 0;
}

struct Parsed {
    WavInfo info;
    std::span<const std::uint8_t> data;
};

Parsed parse(std::span<const std::uint8_t> b) {
    if (b.size() < 12) throw FormatError("riff", "file shorter than a RIFF header");
    if (!tag_is(b, 0, "RIFF")) throw FormatError("riff", "missing RIFF magic");
    if (!tag_is(b, 8, "WAVE")) throw FormatError("wave", "RIFF form type is not WAVE");

    std::optional<WavInfo> fmt;
    std::optional<std::span<const std::uint8_t>> data;
    std::size_t pos = 12;
    while (pos + 8 <= b.size()) {
        const std::uint32_t len = get_u32(b, pos + 4);
        const std::size_t body = pos + 8;
        if (tag_is(b, pos, "fmt ")) {
            if (len < 16 || body + 16 > b.size()) throw FormatError("fmt", "fmt chunk truncated");
            WavInfo info;
            info.format_tag = get_u16(b, body);
            info.channels = get_u16(b, body + 2);
            info.sample_rate = get_u32(b, body + 4);
            info.bits_per_sample = get_u16(b, body + 14);
            fmt = info;
        } else if (tag_is(b, pos, "data")) {
            if (body + len > b.size()) throw FormatError("data", "data chunk truncated");
            data = b.subspan(body, len);
        }
        pos = body + len + (len & 1u);
    }
    if (!fmt) throw FormatError("fmt", "no fmt chunk");
    if (!data) throw FormatError("data", "no data chunk");
    const std::size_t block = static_cast<std::size_t>(fmt->channels) * (fmt->bits_per_sample / 8);
    fmt->frames = block == 0 ? 0 : data->size() / block;
    return {*fmt, *data};
}

}  // namespace

WavInfo inspect_wav(std::span<const std::uint8_t> bytes) { return parse(bytes).info; }

std::vector<AudioRecord> decode_wav(std::span<const std::uint8_t> bytes) {
    auto [info, data] = parse(bytes);
    if (info.format_tag != kFormatPcm)
        throw FormatError("format_tag", "expected PCM (1), got " + std::to_string(info.format_tag));
    if (info.channels != 1) throw FormatError("channels", "expected mono, got " + std::to_string(info.channels));
    if (info.sample_rate != 44100)
        throw FormatError("sample_rate", "expected 44100 Hz, got " + std::to_string(info.sample_rate));
    if (info.bits_per_sample != 16)
        throw FormatError("bits_per_sample", "expected 16, got " + std::to_string(info.bits_per_sample));
    if (data.size() % 2 != 0) throw FormatError("data", "odd number of PCM bytes");

    const std::size_t n = data.size() / 2;
    if (n % kRecordSamples != 0)
        throw FormatError("data", std::to_string(n) + " samples is not a whole number of " +
                                      std::to_string(kRecordSamples) + "-sample records");
    std::vector<AudioRecord> records;
    records.reserve(n / kRecordSamples);
    std::vector<double> buf(kRecordSamples);
    for (std::size_t r = 0; r < n / kRecordSamples; ++r) {
        for (std::size_t i = 0; i < kRecordSamples; ++i) {
            const auto raw = static_cast<std::int16_t>(get_u16(data, 2 * (r * kRecordSamples + i)));
            buf[i] = static_cast<double>(raw) / 32768.0;
        }
        records.emplace_back(buf);
    }
    return records;
}

std::vector<std::uint8_t> encode_wav_samples(std::span<const double> samples, std::uint16_t channels,
                                             std::uint32_t sample_rate) {
    const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    std::vector<std::uint8_t> b;
    b.reserve(44 + data_bytes);
    put_tag(b, "RIFF");
    put_u32(b, 36 + data_bytes);
    put_tag(b, "WAVE");
    put_tag(b, "fmt ");
    put_u32(b, 16);
    put_u16(b, kFormatPcm);
    put_u16(b, channels);
    put_u32(b, sample_rate);
    put_u32(b, sample_rate * channels * 2);
    put_u16(b, static_cast<std::uint16_t>(channels * 2));
    put_u16(b, 16);
    put_tag(b, "data");
    put_u32(b, data_bytes);
    for (double x : samples) {
        const long q = std::clamp(std::lround(x * 32768.0), -32768L, 32767L);
        put_u16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    return b;
}

std::vector<std::uint8_t> encode_wav(std::span<const AudioRecord> records) {
    std::vector<double> all;
    all.reserve(records.size() * kRecordSamples);
    for (const auto &r : records) all.insert(all.end(), r.samples().begin(), r.samples().end());
    return encode_wav_samples(all);
}

std::vector<AudioRecord> wav_read(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_wav(bytes);
}

void wav_write(std::span<const AudioRecord> records, const std::filesystem::path &path) {
    const auto bytes = encode_wav(records);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

}  // namespace roomrec::audio
