#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "roomrec/audio/types.hpp"

namespace roomrec::sim {

struct Resonance {
    double freq_hz = 20000.0;
    double q = 40.0;
    double weight = 1.0;  ///< mix level of the resonator output relative to the dry echo

    friend bool operator==(const Resonance &, const Resonance &) = default;
};

/// Per-room echo signature: a sparse set of delayed reflections plus narrowband resonances.
struct RoomProfile {
    std::string room_id;
    std::vector<double> path_delays_ms;  ///< strictly increasing, each in (3, 90)
    std::vector<double> path_gains;      ///< each in (0, 0.05]
    std::vector<Resonance> resonances;   ///< 2-4 peaks inside [19.5, 20.5] kHz
    double absorption = 0.3;             ///< broadband attenuation in (0, 1)
    std::uint64_t seed = 0;

    /// Throws ArgumentError describing the first violated invariant.
    void validate() const;

    friend bool operator==(const RoomProfile &, const RoomProfile &) = default;
};

/// Seeded multi-sine surrogate for ambient music.
struct Interferer {
    double top_hz = 19000.0;          ///< strong components are confined below this frequency
    double weak_top_hz = 0.0;         ///< if > top_hz, adds weak components in [top_hz, weak_top_hz]
    double level = 0.05;              ///< peak amplitude of the strongest tone
    double weak_level_db = -40.0;     ///< weak components relative to `level`
    int tones = 32;
    double low_hz = 80.0;

    void validate(double sample_rate_hz = audio::kSampleRateHz) const;
};

/// Capture conditions shared by a batch of records.
struct CaptureContext {
    double spot_jitter = 1.0;  ///< scale of per-record delay/gain perturbation (0 = none)
    double ringing_ms = 10.0;  ///< loudspeaker damped oscillation, ~60 dB down after this long
    double snr_db = 25.0;      ///< echo-to-noise ratio; +infinity disables noise
    std::optional<Interferer> interferer;

    void validate() const;
};

/// Per-record jitter magnitudes at spot_jitter = 1.
struct JitterScale {
    double global_shift_ms = 1.6;  ///< common delay offset (uniform +/-)
    double path_delay_ms = 0.12;   ///< independent per-path delay (std-dev)
    double path_gain = 0.15;       ///< relative per-path gain (std-dev)
    double resonance_hz = 25.0;    ///< resonance centre wander (std-dev)
};

/// Amplitude of the emitted chirp inside every synthetic record.
inline constexpr double kChirpAmplitude = 0.5;

/// Deterministic RNG for record `index` of room `room_index` under `master_seed`.
std::mt19937_64 record_rng(std::uint64_t master_seed, std::uint64_t room_index, std::uint64_t index);

/// chirp + damped 20 kHz ringing + resonance-coloured delayed echoes + noise (+ interferer).
audio::AudioRecord synth_record(const RoomProfile &room, const CaptureContext &ctx, std::mt19937_64 &rng,
                                const JitterScale &jitter = {});

/// The interferer waveform alone (one record long), drawn from `rng`.
std::vector<double> synth_interferer(const Interferer &cfg, std::mt19937_64 &rng,
                                     double sample_rate_hz = audio::kSampleRateHz);

/// Adds an interferer to an existing record, clipping to [-1, 1].
audio::AudioRecord add_interferer(const audio::AudioRecord &rec, const Interferer &cfg, std::mt19937_64 &rng);

struct LabeledRecord {
    audio::AudioRecord record;
    std::string label;
};

/// `per_room` records for every profile; record i of room r uses record_rng(master_seed ^ room.seed, r, i).
/// Throws ArgumentError on duplicate room ids.
std::vector<LabeledRecord> synth_corpus(const std::vector<RoomProfile> &rooms, std::size_t per_room,
                                        const CaptureContext &ctx, std::uint64_t master_seed = 0,
                                        const JitterScale &jitter = {});

/// `count` mutually distinct random rooms, named room00, room01, ...
std::vector<RoomProfile> default_profiles(std::size_t count, std::uint64_t seed = 2018);

std::string profile_to_json(const RoomProfile &p);
RoomProfile profile_from_json(const std::string &text);
std::string profiles_to_json(const std::vector<RoomProfile> &ps);
std::vector<RoomProfile> profiles_from_json(const std::string &text);

}  // namespace roomrec::sim
