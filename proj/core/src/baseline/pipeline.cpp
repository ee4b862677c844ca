#include "roomrec/baseline/pipeline.hpp"

#include <cmath>
#include <ostream>

#include "roomrec/audio/framing.hpp"
#include "roomrec/error.hpp"

namespace roomrec::baseline {

Scaler Scaler::fit(const std::vector<std::vector<double>> &rows) {
    if (rows.empty()) throw ArgumentError("cannot fit a scaler on no rows");
    const std::size_t d = rows.front().size();
    Scaler s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 0.0);
    for (const auto &r : rows)
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
    for (auto &m : s.mean) m /= static_cast<double>(rows.size());
    for (const auto &r : rows)
        for (std::size_t j = 0; j < d; ++j) s.scale[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
    for (auto &v : s.scale) {
        v = std::sqrt(v / static_cast<double>(rows.size()));
        if (!(v > 1e-12)) v = 1.0;
    }
    return s;
}

std::vector<double> Scaler::apply(std::span<const double> row) const {
    if (row.size() != mean.size()) throw ShapeError("scaler width mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
    return out;
}

std::vector<double> record_mfcc(const audio::AudioRecord &rec, const MfccConfig &cfg) {
    return mfcc(audio::echo_frame(rec), cfg);
}

MfccSvmClassifier::MfccSvmClassifier(MfccConfig mfcc, KernelConfig kernel) : mfcc_(mfcc), kernel_(kernel) {
    mfcc_.validate();
}

void MfccSvmClassifier::fit(std::span<const audio::AudioRecord> records, std::span<const int> labels,
                            std::vector<std::string> class_names) {
    std::vector<std::vector<double>> feats;
    feats.reserve(records.size());
    for (const auto &r : records) feats.push_back(record_mfcc(r, mfcc_));
    if (feats.empty()) throw ArgumentError("no training records");
    scaler_ = Scaler::fit(feats);
    for (auto &f : feats) f = scaler_.apply(f);
    svm_ = svm_train(feats, labels, std::move(class_names), kernel_);
    fitted_ = true;
}

int MfccSvmClassifier::predict(const audio::AudioRecord &rec) const {
    if (!fitted_) throw ArgumentError("classifier has not been fitted");
    return svm_predict(svm_, scaler_.apply(record_mfcc(rec, mfcc_)));
}

double MfccSvmClassifier::accuracy(std::span<const audio::AudioRecord> records, std::span<const int> labels) const {
    if (records.empty() || records.size() != labels.size()) throw ArgumentError("records and labels must match and be non-empty");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < records.size(); ++i) hits += predict(records[i]) == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

void write_features_csv(std::ostream &out, const std::vector<std::vector<double>> &rows, std::span<const int> labels) {
    if (rows.size() != labels.size()) throw ArgumentError("rows and labels differ in length");
    out << "label";
    const std::size_t d = rows.empty() ? 0 : rows.front().size();
    for (std::size_t j = 0; j < d; ++j) out << ",c" << j;
    out << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << labels[i];
        for (double v : rows[i]) out << ',' << v;
        out << '\n';
    }
}

}  // namespace roomrec::baseline
