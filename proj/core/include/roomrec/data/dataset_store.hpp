#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "roomrec/audio/types.hpp"

namespace roomrec::data {

enum class Split { unassigned, train, val, test };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

struct RoomLabel {
    std::string label_id;
    int class_index = 0;

    friend bool operator==(const RoomLabel &, const RoomLabel &) = default;
};

struct SampleRef {
    std::string file;  ///< relative to the store root
    Split split = Split::unassigned;
    std::string sha256;

    friend bool operator==(const SampleRef &, const SampleRef &) = default;
};

struct RoomEntry {
    RoomLabel label;
    std::vector<SampleRef> samples;

    friend bool operator==(const RoomEntry &, const RoomEntry &) = default;
};

/// Persistent map of room labels to stored samples and their split tags.
/// Rooms are kept in class-index order; indices are contiguous from 0.
struct RoomManifest {
    std::uint64_t version = 0;
    std::vector<RoomEntry> rooms;

    [[nodiscard]] std::size_t num_classes() const noexcept { return rooms.size(); }
    [[nodiscard]] std::size_t num_samples() const noexcept;
    [[nodiscard]] const RoomEntry *find(std::string_view label_id) const noexcept;
    [[nodiscard]] std::vector<RoomLabel> labels() const;

    std::string to_json() const;
    static RoomManifest from_json(const std::string &text);

    friend bool operator==(const RoomManifest &, const RoomManifest &) = default;
};

/// Per-room split sizes. Fixed mode assigns exact counts (remainder goes to train);
/// fractional mode sizes val/test as fractions of whatever the room holds.
struct SplitPolicy {
    std::size_t train = 500;
    std::size_t val = 250;
    std::size_t test = 250;
    bool fractional = false;
    double val_fraction = 0.25;
    double test_fraction = 0.25;

    static SplitPolicy fractions(double val, double test) {
        SplitPolicy p;
        p.fractional = true;
        p.val_fraction = val;
        p.test_fraction = test;
        return p;
    }
};

/// Seeded per-room shuffle then assignment of split tags. Throws PolicyError naming the room
/// when a room holds too few samples.
RoomManifest split(const RoomManifest &manifest, const SplitPolicy &policy, std::uint64_t seed);

struct LabeledAudio {
    audio::AudioRecord record;
    std::string label;
};

/// Loaded sample with its class index.
struct StoredSample {
    audio::AudioRecord record;
    int class_index = 0;
    Split split = Split::unassigned;
};

/// Directory of per-room WAV files plus `manifest.json` at the root.
/// Mutations serialise on an internal lock; readers observe the last committed manifest.
class DatasetStore {
  public:
    /// Opens (or initialises) a store rooted at `root`.
    explicit DatasetStore(std::filesystem::path root);

    [[nodiscard]] const std::filesystem::path &root() const noexcept { return root_; }
    [[nodiscard]] RoomManifest manifest() const;

    /// Persists records as WAV and returns the new manifest. New labels take the next class indices.
    /// With `dedup`, a record whose WAV digest already exists in its room is skipped.
    RoomManifest ingest(const std::vector<LabeledAudio> &records, bool dedup = true);

    /// Applies `split` and persists the tags.
    RoomManifest apply_split(const SplitPolicy &policy, std::uint64_t seed);

    /// Reads all samples carrying `which` (or every sample when nullopt) from disk.
    [[nodiscard]] std::vector<StoredSample> load(std::optional<Split> which = std::nullopt) const;

    /// Digest over every sample hash in manifest order; identifies corpus content.
    [[nodiscard]] std::string content_hash() const;

  private:
    void save_locked(const RoomManifest &m) const;

    std::filesystem::path root_;
    mutable std::shared_mutex mutex_;
    RoomManifest manifest_;
};

/// Throws ArgumentError unless `label` is usable as a directory name.
void validate_label(std::string_view label);

}  // namespace roomrec::data
