#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace roomrec::audio {

inline constexpr double kSampleRateHz = 44100.0;
inline constexpr std::size_t kRecordSamples = 4410;
inline constexpr std::size_t kChirpSamples = 88;
inline constexpr std::size_t kGuardSamples = 22;
inline constexpr std::size_t kEchoSamples = 4300;

inline constexpr std::size_t kSpectrogramFrames = 32;
inline constexpr std::size_t kSpectrogramBins = 5;
inline constexpr std::size_t kPsdBins = 147;

struct ChirpConfig {
    double carrier_hz = 20000.0;
    double chirp_ms = 2.0;
    double period_ms = 100.0;
    double sample_rate_hz = kSampleRateHz;
    double amplitude = 1.0;

    /// Throws ConfigError if the carrier is at/above Nyquist, amplitude is outside (0,1],
    /// or the chirp does not fit in the emission period.
    void validate() const;
};

/// Sample-level partition of one 100 ms record: chirp, safeguard, echo window.
struct FrameLayout {
    std::size_t chirp_samples = kChirpSamples;
    std::size_t guard_samples = kGuardSamples;
    std::size_t echo_samples = kEchoSamples;

    [[nodiscard]] constexpr std::size_t total() const noexcept {
        return chirp_samples + guard_samples + echo_samples;
    }
};

struct BandSelection {
    double low_hz = 19500.0;
    double high_hz = 20500.0;
};

/// One 100 ms mono capture at 44.1 kHz. Length and finiteness are enforced on construction.
class AudioRecord {
  public:
    AudioRecord();
    explicit AudioRecord(std::vector<double> samples);

    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
    [[nodiscard]] double sample_rate_hz() const noexcept { return kSampleRateHz; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }

    friend bool operator==(const AudioRecord &, const AudioRecord &) = default;

  private:
    std::vector<double> samples_;
};

/// The 4300-sample echo window cut from a record.
class EchoFrame {
  public:
    EchoFrame();
    explicit EchoFrame(std::vector<double> samples);
    explicit EchoFrame(std::span<const double> samples);

    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }

  private:
    std::vector<double> samples_;
};

struct PsdSegment {
    std::vector<double> values;
    std::vector<double> bin_hz;
};

/// 32 (time) x 5 (frequency) log-power image, row-major by time.
struct Spectrogram {
    std::array<double, kSpectrogramFrames * kSpectrogramBins> grid{};
    std::array<double, kSpectrogramBins> bin_hz{};

    [[nodiscard]] double at(std::size_t t, std::size_t f) const { return grid[t * kSpectrogramBins + f]; }
    double &at(std::size_t t, std::size_t f) { return grid[t * kSpectrogramBins + f]; }
};

}  // namespace roomrec::audio
