#include "roomrec/data/dataset_store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "roomrec/audio/wav.hpp"
#include "roomrec/data/sha256.hpp"
#include "roomrec/error.hpp"

namespace roomrec::data {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Split s) {
    switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::unassigned: break;
    }
    return "unassigned";
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    if (s == "unassigned") return Split::unassigned;
    throw FormatError("split", "unknown split tag '" + std::string(s) + "'");
}

void validate_label(std::string_view label) {
    if (label.empty() || label.size() > 64) throw ArgumentError("label must be 1-64 characters");
    if (label.front() == '.') throw ArgumentError("label must not start with '.'");
    for (char c : label) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        if (!ok) throw ArgumentError("label '" + std::string(label) + "' may only contain [A-Za-z0-9._-]");
    }
}

std::size_t RoomManifest::num_samples() const noexcept {
    std::size_t n = 0;
    for (const auto &r : rooms) n += r.samples.size();
    return n;
}

const RoomEntry *RoomManifest::find(std::string_view label_id) const noexcept {
    for (const auto &r : rooms)
        if (r.label.label_id == label_id) return &r;
    return nullptr;
}

std::vector<RoomLabel> RoomManifest::labels() const {
    std::vector<RoomLabel> out;
    for (const auto &r : rooms) out.push_back(r.label);
    return out;
}

std::string RoomManifest::to_json() const {
    json rooms_j = json::array();
    for (const auto &r : rooms) {
        json samples = json::array();
        for (const auto &s : r.samples)
            samples.push_back({{"file", s.file}, {"split", std::string(data::to_string(s.split))}, {"sha256", s.sha256}});
        rooms_j.push_back({{"label_id", r.label.label_id}, {"class_index", r.label.class_index}, {"samples", samples}});
    }
    return json{{"version", version}, {"rooms", rooms_j}}.dump(1);
}

RoomManifest RoomManifest::from_json(const std::string &text) {
    RoomManifest m;
    try {
        auto j = json::parse(text);
        m.version = j.at("version").get<std::uint64_t>();
        for (const auto &r : j.at("rooms")) {
            RoomEntry e;
            e.label.label_id = r.at("label_id").get<std::string>();
            e.label.class_index = r.at("class_index").get<int>();
            for (const auto &s : r.at("samples"))
                e.samples.push_back({s.at("file").get<std::string>(), split_from_string(s.at("split").get<std::string>()),
                                     s.at("sha256").get<std::string>()});
            m.rooms.push_back(std::move(e));
        }
    } catch (const json::exception &e) {
        throw FormatError("manifest", e.what());
    }
    std::sort(m.rooms.begin(), m.rooms.end(),
              [](const RoomEntry &a, const RoomEntry &b) { return a.label.class_index < b.label.class_index; });
    for (std::size_t i = 0; i < m.rooms.size(); ++i)
        if (m.rooms[i].label.class_index != static_cast<int>(i))
            throw FormatError("class_index", "class indices are not contiguous from 0");
    return m;
}

RoomManifest split(const RoomManifest &manifest, const SplitPolicy &policy, std::uint64_t seed) {
    RoomManifest out = manifest;
    for (auto &room : out.rooms) {
        const std::size_t n = room.samples.size();
        std::size_t n_val = policy.val;
        std::size_t n_test = policy.test;
        std::size_t n_train = policy.train;
        if (policy.fractional) {
            n_val = static_cast<std::size_t>(static_cast<double>(n) * policy.val_fraction);
            n_test = static_cast<std::size_t>(static_cast<double>(n) * policy.test_fraction);
            n_train = n >= n_val + n_test ? n - n_val - n_test : 0;
            if (n_train == 0 || n_val == 0 || n_test == 0)
                throw PolicyError("room '" + room.label.label_id + "' has " + std::to_string(n) +
                                  " samples, too few for a fractional split");
        } else if (policy.train == 0 || policy.val == 0 || policy.test == 0) {
            throw PolicyError("split counts must be positive");
        } else if (n < policy.train + policy.val + policy.test) {
            throw PolicyError("room '" + room.label.label_id + "' has " + std::to_string(n) + " samples, needs " +
                              std::to_string(policy.train + policy.val + policy.test));
        }

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(room.label.class_index)};
        std::mt19937_64 rng(seq);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t rank = 0; rank < n; ++rank) {
            Split tag = Split::train;  // samples beyond the fixed counts join the training split
            if (rank < n_test)
                tag = Split::test;
            else if (rank < n_test + n_val)
                tag = Split::val;
            room.samples[order[rank]].split = tag;
        }
        (void)n_train;
    }
    return out;
}

DatasetStore::DatasetStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw IoError("cannot create store root " + root_.string() + ": " + ec.message());
    const auto path = root_ / "manifest.json";
    if (fs::exists(path)) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot read " + path.string());
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        manifest_ = RoomManifest::from_json(text);
    } else {
        save_locked(manifest_);
    }
}

RoomManifest DatasetStore::manifest() const {
    std::shared_lock lock(mutex_);
    return manifest_;
}

void DatasetStore::save_locked(const RoomManifest &m) const {
    const auto path = root_ / "manifest.json";
    const auto tmp = root_ / "manifest.json.tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << m.to_json();
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot commit manifest: " + ec.message());
}

RoomManifest DatasetStore::ingest(const std::vector<LabeledAudio> &records, bool dedup) {
    for (const auto &r : records) validate_label(r.label);

    std::unique_lock lock(mutex_);
    RoomManifest next = manifest_;
    std::map<std::string, std::set<std::string>> seen;
    for (const auto &room : next.rooms)
        for (const auto &s : room.samples) seen[room.label.label_id].insert(s.sha256);

    for (const auto &rec : records) {
        auto it = std::find_if(next.rooms.begin(), next.rooms.end(),
                               [&](const RoomEntry &e) { return e.label.label_id == rec.label; });
        if (it == next.rooms.end()) {
            next.rooms.push_back({{rec.label, static_cast<int>(next.rooms.size())}, {}});
            it = std::prev(next.rooms.end());
        }
        const auto bytes = audio::encode_wav(std::span(&rec.record, 1));
        const auto digest = sha256_hex(bytes);
        if (dedup && seen[rec.label].count(digest)) continue;
        seen[rec.label].insert(digest);

        char name[32];
        std::snprintf(name, sizeof name, "%06zu_", it->samples.size());
        const fs::path rel = fs::path("rooms") / rec.label / (std::string(name) + digest.substr(0, 12) + ".wav");
        std::error_code ec;
        fs::create_directories((root_ / rel).parent_path(), ec);
        if (ec) throw IoError("cannot create room directory: " + ec.message());
        std::ofstream out(root_ / rel, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + (root_ / rel).string());
        out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write to " + (root_ / rel).string());
        it->samples.push_back({rel.generic_string(), Split::unassigned, digest});
    }
    next.version = manifest_.version + 1;
    save_locked(next);
    manifest_ = std::move(next);
    return manifest_;
}

RoomManifest DatasetStore::apply_split(const SplitPolicy &policy, std::uint64_t seed) {
    std::unique_lock lock(mutex_);
    RoomManifest next = split(manifest_, policy, seed);
    next.version = manifest_.version + 1;
    save_locked(next);
    manifest_ = std::move(next);
    return manifest_;
}

std::vector<StoredSample> DatasetStore::load(std::optional<Split> which) const {
    const RoomManifest m = manifest();
    std::vector<StoredSample> out;
    for (const auto &room : m.rooms) {
        for (const auto &s : room.samples) {
            if (which && s.split != *which) continue;
            auto recs = audio::wav_read(root_ / s.file);
            if (recs.size() != 1) throw FormatError("data", s.file + " does not hold exactly one record");
            out.push_back({std::move(recs.front()), room.label.class_index, s.split});
        }
    }
    return out;
}

std::string DatasetStore::content_hash() const {
    const RoomManifest m = manifest();
    std::ostringstream acc;
    for (const auto &room : m.rooms) {
        acc << room.label.label_id << ':';
        for (const auto &s : room.samples) acc << s.sha256 << ',';
        acc << ';';
    }
    return sha256_hex(acc.str());
}

}  // namespace roomrec::data
