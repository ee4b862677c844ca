#include "roomrec/experiments/corpus.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "roomrec/audio/wav.hpp"
#include "roomrec/data/sha256.hpp"
#include "roomrec/error.hpp"

namespace roomrec::experiments {

std::vector<std::size_t> Corpus::indices(data::Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < splits.size(); ++i)
        if (splits[i] == s) out.push_back(i);
    return out;
}

void Corpus::require_splits() const {
    if (labels.empty()) throw PolicyError("corpus holds no rooms");
    std::vector<std::array<std::size_t, 3>> counts(labels.size(), {0, 0, 0});
    for (std::size_t i = 0; i < splits.size(); ++i) {
        const auto c = static_cast<std::size_t>(classes[i]);
        if (splits[i] == data::Split::train) ++counts[c][0];
        if (splits[i] == data::Split::val) ++counts[c][1];
        if (splits[i] == data::Split::test) ++counts[c][2];
    }
    for (std::size_t c = 0; c < labels.size(); ++c)
        if (counts[c][0] == 0 || counts[c][1] == 0 || counts[c][2] == 0)
            throw PolicyError("room '" + labels[c].label_id + "' lacks a train, val or test split");
}

std::vector<std::string> Corpus::label_names() const {
    std::vector<std::string> out;
    for (const auto &l : labels) out.push_back(l.label_id);
    return out;
}

Corpus load_corpus(const std::filesystem::path &store_root) {
    if (!std::filesystem::exists(store_root / "manifest.json"))
        throw IoError("no dataset store at " + store_root.string());
    data::DatasetStore store(store_root);
    Corpus c;
    c.labels = store.manifest().labels();
    c.hash = store.content_hash();
    for (auto &s : store.load(std::nullopt)) {
        c.records.push_back(std::move(s.record));
        c.classes.push_back(s.class_index);
        c.splits.push_back(s.split);
    }
    return c;
}

data::SplitPolicy default_policy(std::size_t per_room) {
    if (per_room >= 1000) return {};
    return data::SplitPolicy::fractions(0.25, 0.25);
}

Corpus synth_corpus(const SynthOptions &opts) {
    const auto profiles = sim::default_profiles(opts.rooms, opts.profile_seed);
    auto recs = sim::synth_corpus(profiles, opts.per_room, opts.capture, opts.seed, opts.jitter);

    data::RoomManifest m;
    Corpus c;
    for (std::size_t r = 0; r < profiles.size(); ++r) {
        c.labels.push_back({profiles[r].room_id, static_cast<int>(r)});
        m.rooms.push_back({c.labels.back(), {}});
    }
    std::ostringstream acc;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto r = i / opts.per_room;
        const auto bytes = audio::encode_wav(std::span(&recs[i].record, 1));
        const auto digest = data::sha256_hex(bytes);
        m.rooms[r].samples.push_back({"mem:" + std::to_string(i), data::Split::unassigned, digest});
        if (i % opts.per_room == 0) acc << profiles[r].room_id << ':';
        acc << digest << ',';
        if ((i + 1) % opts.per_room == 0) acc << ';';
    }
    c.hash = data::sha256_hex(acc.str());
    m = data::split(m, default_policy(opts.per_room), opts.seed);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto r = i / opts.per_room;
        c.records.push_back(std::move(recs[i].record));
        c.classes.push_back(static_cast<int>(r));
        c.splits.push_back(m.rooms[r].samples[i % opts.per_room].split);
    }
    return c;
}

data::RoomManifest write_synth_store(const std::filesystem::path &root, const SynthOptions &opts) {
    const auto profiles = sim::default_profiles(opts.rooms, opts.profile_seed);
    data::DatasetStore store(root);
    if (store.manifest().num_samples() != 0) throw PolicyError("store at " + root.string() + " is not empty");
    for (const auto &p : profiles) {
        // one room at a time keeps peak memory at a single room's records
        auto recs = sim::synth_corpus({p}, opts.per_room, opts.capture, opts.seed, opts.jitter);
        std::vector<data::LabeledAudio> batch;
        batch.reserve(recs.size());
        for (auto &r : recs) batch.push_back({std::move(r.record), std::move(r.label)});
        store.ingest(batch, false);
    }
    return store.apply_split(default_policy(opts.per_room), opts.seed);
}

nn::Dataset make_features(const Corpus &corpus, data::Split split, nn::InputKind kind,
                          std::optional<std::size_t> per_room_limit, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_room;
    for (auto i : corpus.indices(split)) by_room[corpus.classes[i]].push_back(i);
    nn::Dataset d;
    d.dim = nn::feature_dim(kind);
    for (auto &[room, idx] : by_room) {
        if (per_room_limit) {
            if (*per_room_limit > idx.size())
                throw PolicyError("room '" + corpus.labels[static_cast<std::size_t>(room)].label_id + "' has " +
                                  std::to_string(idx.size()) + " samples in this split, " +
                                  std::to_string(*per_room_limit) + " requested");
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(room)};
            std::mt19937_64 rng(seq);
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(*per_room_limit);
            std::sort(idx.begin(), idx.end());
        }
        for (auto i : idx) d.append(nn::extract_features(corpus.records[i], kind), room);
    }
    return d;
}

}  // namespace roomrec::experiments
