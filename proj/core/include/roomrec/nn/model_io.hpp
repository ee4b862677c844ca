#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "roomrec/data/dataset_store.hpp"
#include "roomrec/nn/features.hpp"
#include "roomrec/nn/network.hpp"

namespace roomrec::nn {

/// A trained classifier: network, class labels, input normalisation and a version number.
struct ModelBundle {
    Network<float> net;
    std::vector<data::RoomLabel> labels;
    Normalizer normalizer;
    InputKind input = InputKind::spectrogram;
    std::uint64_t version = 0;

    [[nodiscard]] const CnnArch &arch() const noexcept { return net.arch(); }
    [[nodiscard]] std::size_t num_classes() const noexcept { return net.num_classes(); }

    /// Logits (N x K) for raw, un-normalised feature rows.
    [[nodiscard]] std::vector<float> logits(std::span<const float> raw_rows, std::size_t n) const;
    /// Softmax probabilities (N x K).
    [[nodiscard]] std::vector<double> probabilities(std::span<const float> raw_rows, std::size_t n) const;

    /// Throws ShapeError when labels, normaliser and network disagree.
    void validate() const;
};

/// Binary layout: "RRM1", u32 little-endian header length, JSON header, then every parameter
/// as little-endian float32 in header order.
std::vector<std::uint8_t> serialize_model(const ModelBundle &m);
/// Throws FormatError naming the offending field.
ModelBundle deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ModelBundle &m, const std::filesystem::path &path);
ModelBundle load_model(const std::filesystem::path &path);

}  // namespace roomrec::nn
