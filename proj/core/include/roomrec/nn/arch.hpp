#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace roomrec::nn {

enum class LayerKind { conv, maxpool, flatten, dense, dropout, softmax };
enum class Padding { same, valid };

std::string_view to_string(LayerKind k);

/// One layer of a network description. Only the fields relevant to `kind` are read.
struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    std::string name;
    std::size_t filters = 0;      ///< conv
    std::size_t kernel_h = 0;     ///< conv / maxpool window
    std::size_t kernel_w = 0;
    std::size_t stride = 1;       ///< conv only; pooling stride equals its window
    Padding padding = Padding::same;
    std::size_t units = 0;        ///< dense
    bool relu = true;             ///< conv / dense activation
    double rate = 0.0;            ///< dropout

    friend bool operator==(const LayerSpec &, const LayerSpec &) = default;
};

/// H x W x C activation shape.
struct Dims {
    std::size_t h = 0, w = 0, c = 0;

    [[nodiscard]] constexpr std::size_t size() const noexcept { return h * w * c; }
    friend bool operator==(const Dims &, const Dims &) = default;
};

inline constexpr Dims kSpectrogramInput{32, 5, 1};
inline constexpr Dims kPsdInput{1, 147, 1};

struct CnnArch {
    std::string name;
    Dims input = kSpectrogramInput;
    std::size_t num_classes = 0;
    std::vector<LayerSpec> layers;

    /// Throws ShapeError/ArgumentError unless the layer stack chains and ends in a K-unit dense
    /// (optionally followed by softmax).
    void validate() const;

    /// Output dims after every layer (same length as `layers`).
    [[nodiscard]] std::vector<Dims> output_dims() const;

    std::string to_json() const;
    static CnnArch from_json(const std::string &text);

    friend bool operator==(const CnnArch &, const CnnArch &) = default;
};

/// Weight + bias count summed over layers.
std::size_t count_params(const CnnArch &arch);

/// Parameterised spectrogram CNN, used for the hyper-parameter sweeps.
struct CnnOptions {
    std::vector<std::size_t> conv_filters{16, 32};
    std::size_t kernel = 4;
    std::size_t pooled_convs = 2;  ///< max pooling follows each of the first N convs
    std::size_t dense_layers = 2;  ///< including the K-way output layer
    std::size_t dense_units = 1024;
    double dropout = 0.4;
    Dims input = kSpectrogramInput;
    bool one_dimensional = false;  ///< 1 x kernel filters and 1 x 2 pooling
};

CnnArch build_cnn(const CnnOptions &opts, std::size_t num_classes, std::string name = "custom");

/// Named stacks: "A".."G" (or "CNN-A".."CNN-G"), "CNN-psd", "DNN-psd", "DNN-spec".
/// Throws ArgumentError for unknown names.
CnnArch build_named_arch(std::string_view name, std::size_t num_classes);

/// Names accepted by build_named_arch in canonical form.
std::vector<std::string> named_archs();

}  // namespace roomrec::nn
