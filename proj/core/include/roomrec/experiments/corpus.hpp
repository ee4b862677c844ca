#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roomrec/audio/types.hpp"
#include "roomrec/data/dataset_store.hpp"
#include "roomrec/nn/features.hpp"
#include "roomrec/sim/echo_sim.hpp"

namespace roomrec::experiments {

/// Labelled, split-tagged records held in memory.
struct Corpus {
    std::vector<data::RoomLabel> labels;
    std::vector<audio::AudioRecord> records;
    std::vector<int> classes;
    std::vector<data::Split> splits;
    std::string hash;  ///< content hash over labels and sample digests

    [[nodiscard]] std::size_t num_classes() const noexcept { return labels.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
    [[nodiscard]] std::vector<std::size_t> indices(data::Split s) const;
    /// Throws PolicyError unless every room has train, val and test samples.
    void require_splits() const;
    [[nodiscard]] std::vector<std::string> label_names() const;
};

/// Every record of a dataset store, with its split tags.
Corpus load_corpus(const std::filesystem::path &store_root);

/// Split policy used for synthetic corpora: fixed 500/250/250 when a room holds at least 1000
/// records, 50/25/25 % otherwise.
data::SplitPolicy default_policy(std::size_t per_room);

struct SynthOptions {
    std::size_t rooms = 10;
    std::size_t per_room = 1000;
    std::uint64_t seed = 1;
    std::uint64_t profile_seed = 2018;
    sim::CaptureContext capture;
    sim::JitterScale jitter;
};

/// Synthesises default rooms and splits them in memory.
Corpus synth_corpus(const SynthOptions &opts);

/// Synthesises default rooms into a dataset store at `root` and applies the split.
data::RoomManifest write_synth_store(const std::filesystem::path &root, const SynthOptions &opts);

/// Feature matrix for one split; `per_room_limit` keeps the first N samples of each room in the
/// order given by a `seed`-driven shuffle.
nn::Dataset make_features(const Corpus &corpus, data::Split split, nn::InputKind kind,
                          std::optional<std::size_t> per_room_limit = std::nullopt, std::uint64_t seed = 0);

}  // namespace roomrec::experiments
