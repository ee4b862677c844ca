#include "roomrec/sim/echo_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "json.hpp"
#include "roomrec/error.hpp"

namespace roomrec::sim {

using audio::kRecordSamples;
using audio::kSampleRateHz;

namespace {

constexpr double kCarrierHz = 20000.0;
constexpr std::size_t kPulseTail = 320;

double ms_to_samples(double ms) { return ms * kSampleRateHz / 1000.0; }

/// RBJ band-pass (0 dB peak) applied to `x`, output length x.size().
std::vector<double> bandpass(const std::vector<double> &x, double f0, double q) {
    const double w0 = 2.0 * std::numbers::pi * f0 / kSampleRateHz;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    const double b0 = alpha / a0;
    const double b2 = -alpha / a0;
    const double a1 = -2.0 * std::cos(w0) / a0;
    const double a2 = (1.0 - alpha) / a0;
    std::vector<double> y(x.size());
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double v = b0 * x[n] + b2 * x2 - a1 * y1 - a2 * y2;
        x2 = x1;
        x1 = x[n];
        y2 = y1;
        y1 = v;
        y[n] = v;
    }
    return y;
}

std::vector<std::uint32_t> split_words(std::initializer_list<std::uint64_t> values) {
    std::vector<std::uint32_t> words;
    for (auto v : values) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    }
    return words;
}

}  // namespace

void RoomProfile::validate() const {
    if (room_id.empty()) throw ArgumentError("room_id must not be empty");
    if (path_delays_ms.size() < 3) throw ArgumentError(room_id + ": need at least 3 reflection paths");
    if (path_gains.size() != path_delays_ms.size())
        throw ArgumentError(room_id + ": path_gains and path_delays_ms differ in length");
    for (std::size_t i = 0; i < path_delays_ms.size(); ++i) {
        const double d = path_delays_ms[i];
        if (!(d > 3.0 && d < 90.0)) throw ArgumentError(room_id + ": path delay outside (3, 90) ms");
        if (i > 0 && !(d > path_delays_ms[i - 1])) throw ArgumentError(room_id + ": delays must strictly increase");
        if (!(path_gains[i] > 0.0 && path_gains[i] <= 0.05))
            throw ArgumentError(room_id + ": path gain outside (0, 0.05]");
    }
    if (resonances.size() < 2 || resonances.size() > 4) throw ArgumentError(room_id + ": need 2-4 resonances");
    for (const auto &r : resonances) {
        if (r.freq_hz < 19500.0 || r.freq_hz > 20500.0)
            throw ArgumentError(room_id + ": resonance outside [19.5, 20.5] kHz");
        if (!(r.q > 0.0) || !(r.weight >= 0.0)) throw ArgumentError(room_id + ": bad resonance Q/weight");
    }
    if (!(absorption > 0.0 && absorption < 1.0)) throw ArgumentError(room_id + ": absorption outside (0, 1)");
}

void Interferer::validate(double sample_rate_hz) const {
    const double nyquist = sample_rate_hz / 2.0;
    if (!(top_hz > low_hz) || top_hz >= nyquist)
        throw ConfigError("interferer top_hz " + std::to_string(top_hz) + " must lie in (low_hz, Nyquist)");
    if (weak_top_hz > 0.0 && weak_top_hz >= nyquist)
        throw ConfigError("interferer weak_top_hz " + std::to_string(weak_top_hz) + " is above Nyquist");
    if (tones < 1 || !(level >= 0.0)) throw ConfigError("interferer needs >= 1 tone and a non-negative level");
}

void CaptureContext::validate() const {
    if (!(ringing_ms >= 0.0 && ringing_ms < 97.5)) throw ArgumentError("ringing_ms must lie in [0, 97.5)");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw ArgumentError("snr_db must be finite or +infinity");
    if (!(spot_jitter >= 0.0)) throw ArgumentError("spot_jitter must be non-negative");
    if (interferer) interferer->validate();
}

std::mt19937_64 record_rng(std::uint64_t master_seed, std::uint64_t room_index, std::uint64_t index) {
    auto words = split_words({master_seed, room_index, index});
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

std::vector<double> synth_interferer(const Interferer &cfg, std::mt19937_64 &rng, double sample_rate_hz) {
    cfg.validate(sample_rate_hz);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> out(kRecordSamples, 0.0);
    auto add_tone = [&](double f, double amp) {
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        const double w = 2.0 * std::numbers::pi * f / sample_rate_hz;
        for (std::size_t n = 0; n < out.size(); ++n) out[n] += amp * std::sin(w * static_cast<double>(n) + phase);
    };
    // log-uniform tone placement with a 1/sqrt(f) amplitude roll-off, like a music spectrum
    const double log_lo = std::log(cfg.low_hz);
    const double log_hi = std::log(cfg.top_hz);
    for (int i = 0; i < cfg.tones; ++i) {
        const double f = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
        add_tone(f, cfg.level * std::sqrt(cfg.low_hz / f) * (0.5 + 0.5 * unit(rng)));
    }
    if (cfg.weak_top_hz > cfg.top_hz) {
        const double weak = cfg.level * std::pow(10.0, cfg.weak_level_db / 20.0);
        for (int i = 0; i < std::max(1, cfg.tones / 4); ++i)
            add_tone(cfg.top_hz + (cfg.weak_top_hz - cfg.top_hz) * unit(rng), weak * (0.5 + 0.5 * unit(rng)));
    }
    return out;
}

audio::AudioRecord add_interferer(const audio::AudioRecord &rec, const Interferer &cfg, std::mt19937_64 &rng) {
    auto noise = synth_interferer(cfg, rng);
    std::vector<double> out(rec.samples().begin(), rec.samples().end());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = std::clamp(out[n] + noise[n], -1.0, 1.0);
    return audio::AudioRecord(std::move(out));
}

audio::AudioRecord synth_record(const RoomProfile &room, const CaptureContext &ctx, std::mt19937_64 &rng,
                                const JitterScale &jitter) {
    room.validate();
    ctx.validate();
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    const double w = 2.0 * std::numbers::pi * kCarrierHz / kSampleRateHz;
    const std::size_t chirp_len = audio::kChirpSamples;
    std::vector<double> direct(kRecordSamples, 0.0);
    for (std::size_t n = 0; n < chirp_len; ++n) direct[n] = kChirpAmplitude * std::sin(w * static_cast<double>(n));

    // loudspeaker ringing: 60 dB decay over ringing_ms
    if (ctx.ringing_ms > 0.0) {
        const double tau = ms_to_samples(ctx.ringing_ms) / std::log(1000.0);
        const double amp = 0.5 * kChirpAmplitude * (1.0 + 0.1 * gauss(rng));
        for (std::size_t n = chirp_len; n < kRecordSamples; ++n) {
            const double t = static_cast<double>(n - chirp_len);
            direct[n] += amp * std::exp(-t / tau) * std::sin(w * static_cast<double>(n));
        }
    }

    // resonance-coloured echo pulse, with per-record wander of the resonance centres
    const double j = ctx.spot_jitter;
    std::vector<double> pulse(chirp_len + kPulseTail, 0.0);
    for (std::size_t n = 0; n < chirp_len; ++n) pulse[n] = kChirpAmplitude * std::sin(w * static_cast<double>(n));
    std::vector<double> coloured = pulse;
    for (const auto &r : room.resonances) {
        const double f = r.freq_hz + j * jitter.resonance_hz * gauss(rng);
        const auto band = bandpass(pulse, f, r.q);
        for (std::size_t n = 0; n < coloured.size(); ++n) coloured[n] += r.weight * band[n];
    }

    std::vector<double> echoes(kRecordSamples, 0.0);
    const double shift = j * jitter.global_shift_ms * unit(rng);
    for (std::size_t i = 0; i < room.path_delays_ms.size(); ++i) {
        const double delay = room.path_delays_ms[i] + shift + j * jitter.path_delay_ms * gauss(rng);
        const double gain =
            room.path_gains[i] * (1.0 - room.absorption) * std::max(0.0, 1.0 + j * jitter.path_gain * gauss(rng));
        const auto start = static_cast<long>(std::lround(ms_to_samples(delay)));
        for (std::size_t n = 0; n < coloured.size(); ++n) {
            const long at = start + static_cast<long>(n);
            if (at >= 0 && at < static_cast<long>(kRecordSamples)) echoes[static_cast<std::size_t>(at)] += gain * coloured[n];
        }
    }

    std::vector<double> out(kRecordSamples);
    for (std::size_t n = 0; n < kRecordSamples; ++n) out[n] = direct[n] + echoes[n];

    if (std::isfinite(ctx.snr_db)) {
        const std::size_t echo_start = audio::kChirpSamples + audio::kGuardSamples;
        double energy = 0.0;
        for (std::size_t n = echo_start; n < kRecordSamples; ++n) energy += echoes[n] * echoes[n];
        const double rms = std::sqrt(energy / static_cast<double>(kRecordSamples - echo_start));
        const double sigma = rms / std::pow(10.0, ctx.snr_db / 20.0);
        for (auto &v : out) v += sigma * gauss(rng);
    }

    if (ctx.interferer) {
        std::mt19937_64 irng(rng());
        const auto music = synth_interferer(*ctx.interferer, irng);
        for (std::size_t n = 0; n < kRecordSamples; ++n) out[n] += music[n];
    }

    for (auto &v : out) v = std::clamp(v, -1.0, 1.0);
    return audio::AudioRecord(std::move(out));
}

std::vector<LabeledRecord> synth_corpus(const std::vector<RoomProfile> &rooms, std::size_t per_room,
                                        const CaptureContext &ctx, std::uint64_t master_seed,
                                        const JitterScale &jitter) {
    if (per_room == 0) throw ArgumentError("per_room must be at least 1");
    std::set<std::string> ids;
    for (const auto &r : rooms)
        if (!ids.insert(r.room_id).second) throw ArgumentError("duplicate room_id '" + r.room_id + "'");

    std::vector<LabeledRecord> out;
    out.reserve(rooms.size() * per_room);
    for (std::size_t r = 0; r < rooms.size(); ++r) {
        for (std::size_t i = 0; i < per_room; ++i) {
            auto rng = record_rng(master_seed ^ rooms[r].seed, r, i);
            out.push_back({synth_record(rooms[r], ctx, rng, jitter), rooms[r].room_id});
        }
    }
    return out;
}

std::vector<RoomProfile> default_profiles(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    std::vector<RoomProfile> rooms;
    rooms.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        RoomProfile p;
        p.room_id = (i < 10 ? "room0" : "room") + std::to_string(i);
        const int paths = std::uniform_int_distribution<int>(4, 7)(rng);
        double d = uni(4.0, 12.0);
        const double g0 = uni(0.025, 0.05);
        const double decay = uni(0.6, 0.85);
        for (int k = 0; k < paths && d < 88.0; ++k) {
            p.path_delays_ms.push_back(d);
            p.path_gains.push_back(std::min(0.05, g0 * std::pow(decay, k) * uni(0.7, 1.0)));
            d += uni(4.0, 16.0);
        }
        const int peaks = std::uniform_int_distribution<int>(2, 4)(rng);
        for (int k = 0; k < peaks; ++k) p.resonances.push_back({uni(19550.0, 20450.0), uni(20.0, 60.0), uni(0.3, 1.0)});
        p.absorption = uni(0.1, 0.5);
        p.seed = rng();
        rooms.push_back(std::move(p));
    }
    return rooms;
}

namespace {

nlohmann::json to_json_value(const RoomProfile &p) {
    nlohmann::json res = nlohmann::json::array();
    for (const auto &r : p.resonances) res.push_back({{"freq_hz", r.freq_hz}, {"q", r.q}, {"weight", r.weight}});
    return {{"room_id", p.room_id},       {"path_delays_ms", p.path_delays_ms},
            {"path_gains", p.path_gains}, {"resonance_peaks", res},
            {"absorption", p.absorption}, {"seed", p.seed}};
}

RoomProfile from_json_value(const nlohmann::json &j) {
    try {
        RoomProfile p;
        p.room_id = j.at("room_id").get<std::string>();
        p.path_delays_ms = j.at("path_delays_ms").get<std::vector<double>>();
        p.path_gains = j.at("path_gains").get<std::vector<double>>();
        for (const auto &r : j.at("resonance_peaks"))
            p.resonances.push_back({r.at("freq_hz").get<double>(), r.at("q").get<double>(), r.value("weight", 1.0)});
        p.absorption = j.at("absorption").get<double>();
        p.seed = j.value("seed", std::uint64_t{0});
        p.validate();
        return p;
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("profile", e.what());
    }
}

nlohmann::json parse_or_throw(const std::string &text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("profile", e.what());
    }
}

}  // namespace

std::string profile_to_json(const RoomProfile &p) { return to_json_value(p).dump(2); }

RoomProfile profile_from_json(const std::string &text) { return from_json_value(parse_or_throw(text)); }

std::string profiles_to_json(const std::vector<RoomProfile> &ps) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &p : ps) arr.push_back(to_json_value(p));
    return arr.dump(2);
}

std::vector<RoomProfile> profiles_from_json(const std::string &text) {
    auto j = parse_or_throw(text);
    if (!j.is_array()) return {from_json_value(j)};
    std::vector<RoomProfile> out;
    for (const auto &e : j) out.push_back(from_json_value(e));
    return out;
}

}  // namespace roomrec::sim
