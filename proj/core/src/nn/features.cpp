#include "roomrec/nn/features.hpp"

#include <cmath>
#include <string>

#include "roomrec/audio/framing.hpp"
#include "roomrec/audio/spectral.hpp"
#include "roomrec/error.hpp"

namespace roomrec::nn {

std::string_view to_string(InputKind k) { return k == InputKind::psd ? "psd" : "spectrogram"; }

InputKind input_kind_from_string(std::string_view s) {
    if (s == "spectrogram") return InputKind::spectrogram;
    if (s == "psd") return InputKind::psd;
    throw FormatError("input", "unknown input kind '" + std::string(s) + "'");
}

std::size_t feature_dim(InputKind k) {
    return k == InputKind::psd ? audio::kPsdBins : audio::kSpectrogramFrames * audio::kSpectrogramBins;
}

std::vector<float> extract_features(const audio::AudioRecord &rec, InputKind kind) {
    const auto frame = audio::echo_frame(rec);
    std::vector<float> out;
    if (kind == InputKind::spectrogram) {
        const auto spec = audio::spectrogram(frame);
        out.assign(spec.grid.begin(), spec.grid.end());
    } else {
        const auto psd = audio::psd_narrowband(frame);
        out.reserve(psd.values.size());
        for (double v : psd.values) out.push_back(static_cast<float>(10.0 * std::log10(v + audio::kLogFloor)));
    }
    return out;
}

void Dataset::append(std::span<const float> features, int label) {
    if (dim == 0 && y.empty()) dim = features.size();
    if (features.size() != dim)
        throw ShapeError("feature row has " + std::to_string(features.size()) + " values, expected " +
                         std::to_string(dim));
    x.insert(x.end(), features.begin(), features.end());
    y.push_back(label);
}

Dataset make_dataset(std::span<const audio::AudioRecord> records, std::span<const int> labels, InputKind kind) {
    if (records.size() != labels.size()) throw ArgumentError("records and labels differ in length");
    Dataset d;
    d.dim = feature_dim(kind);
    d.x.reserve(records.size() * d.dim);
    for (std::size_t i = 0; i < records.size(); ++i) d.append(extract_features(records[i], kind), labels[i]);
    return d;
}

Normalizer Normalizer::fit(const Dataset &data) {
    if (data.empty()) throw ArgumentError("cannot fit a normalizer on an empty dataset");
    Normalizer n;
    n.mean.assign(data.dim, 0.0);
    n.stddev.assign(data.dim, 0.0);
    const double count = static_cast<double>(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto r = data.row(i);
        for (std::size_t j = 0; j < data.dim; ++j) n.mean[j] += r[j];
    }
    for (auto &m : n.mean) m /= count;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto r = data.row(i);
        for (std::size_t j = 0; j < data.dim; ++j) {
            const double d = r[j] - n.mean[j];
            n.stddev[j] += d * d;
        }
    }
    for (auto &s : n.stddev) {
        s = std::sqrt(s / count);
        if (!(s > 1e-12)) s = 1.0;
    }
    return n;
}

void Normalizer::apply(std::span<const float> in, std::span<float> out) const {
    if (in.size() != mean.size() || out.size() != mean.size())
        throw ShapeError("normalizer expects " + std::to_string(mean.size()) + " features, got " +
                         std::to_string(in.size()));
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = static_cast<float>((in[j] - mean[j]) / stddev[j]);
}

std::vector<float> Normalizer::apply_all(std::span<const float> rows) const {
    if (mean.empty() || rows.size() % mean.size() != 0)
        throw ShapeError("feature matrix width does not match the normalizer");
    std::vector<float> out(rows.size());
    for (std::size_t off = 0; off < rows.size(); off += mean.size())
        apply(rows.subspan(off, mean.size()), std::span(out).subspan(off, mean.size()));
    return out;
}

}  // namespace roomrec::nn
