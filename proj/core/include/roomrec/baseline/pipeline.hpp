#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "roomrec/audio/types.hpp"
#include "roomrec/baseline/mfcc.hpp"
#include "roomrec/baseline/svm.hpp"

namespace roomrec::baseline {

/// Per-feature standardisation fitted on training features.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> scale;

    static Scaler fit(const std::vector<std::vector<double>> &rows);
    [[nodiscard]] std::vector<double> apply(std::span<const double> row) const;
};

/// MFCC features -> standardisation -> one-vs-one SVM.
class MfccSvmClassifier {
  public:
    explicit MfccSvmClassifier(MfccConfig mfcc = MfccConfig::broadband(), KernelConfig kernel = {});

    void fit(std::span<const audio::AudioRecord> records, std::span<const int> labels,
             std::vector<std::string> class_names);
    [[nodiscard]] int predict(const audio::AudioRecord &rec) const;
    [[nodiscard]] double accuracy(std::span<const audio::AudioRecord> records, std::span<const int> labels) const;

    [[nodiscard]] const SvmModel &model() const noexcept { return svm_; }
    [[nodiscard]] const MfccConfig &mfcc_config() const noexcept { return mfcc_; }

  private:
    MfccConfig mfcc_;
    KernelConfig kernel_;
    Scaler scaler_;
    SvmModel svm_;
    bool fitted_ = false;
};

std::vector<double> record_mfcc(const audio::AudioRecord &rec, const MfccConfig &cfg);

/// `label,c0,c1,...` with a header row.
void write_features_csv(std::ostream &out, const std::vector<std::vector<double>> &rows, std::span<const int> labels);

}  // namespace roomrec::baseline
