#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "roomrec/audio/types.hpp"

namespace roomrec::nn {

/// What a model consumes: the 32 x 5 spectrogram image or the 147-point narrowband PSD (dB).
enum class InputKind { spectrogram, psd };

std::string_view to_string(InputKind k);
/// Throws FormatError for anything but "spectrogram" / "psd".
InputKind input_kind_from_string(std::string_view s);

/// 160 for spectrogram, 147 for psd.
std::size_t feature_dim(InputKind k);

/// Features of one record in network input order (time-major for spectrograms).
std::vector<float> extract_features(const audio::AudioRecord &rec, InputKind kind);

/// Row-major feature matrix with integer class labels.
struct Dataset {
    std::size_t dim = 0;
    std::vector<float> x;
    std::vector<int> y;

    [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
    [[nodiscard]] bool empty() const noexcept { return y.empty(); }
    [[nodiscard]] std::span<const float> row(std::size_t i) const { return {x.data() + i * dim, dim}; }
    void append(std::span<const float> features, int label);
};

Dataset make_dataset(std::span<const audio::AudioRecord> records, std::span<const int> labels, InputKind kind);

/// Per-feature z-score with statistics taken from training data. Zero-variance features keep
/// unit scale.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    [[nodiscard]] bool empty() const noexcept { return mean.empty(); }
    static Normalizer fit(const Dataset &data);
    /// Throws ShapeError when the row width does not match.
    void apply(std::span<const float> in, std::span<float> out) const;
    [[nodiscard]] std::vector<float> apply_all(std::span<const float> rows) const;
};

}  // namespace roomrec::nn
