#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "roomrec/experiments/corpus.hpp"
#include "roomrec/nn/arch.hpp"
#include "roomrec/nn/train.hpp"
#include "roomrec/sim/echo_sim.hpp"

namespace roomrec::experiments {

struct RunOptions {
    std::uint64_t seed = 1;
    nn::TrainConfig train;  ///< its seed is replaced by `seed`
    std::function<void(const std::string &)> log;
};

/// One trained-and-tested model.
struct ModelRun {
    std::string name;
    nn::InputKind input = nn::InputKind::spectrogram;
    std::size_t params = 0;
    double accuracy = 0;
    double seconds = 0;
    long steps = 0;
    long best_step = 0;
};

/// Trains `arch` on the train split (optionally subsampled per room), early-stops on val,
/// reports test accuracy.
ModelRun train_and_test(const Corpus &corpus, const nn::CnnArch &arch, nn::InputKind input, const RunOptions &opts,
                        std::optional<std::size_t> per_room_limit = std::nullopt);

struct DesignMatrix {
    ModelRun spec_cnn, spec_dnn, psd_cnn, psd_dnn;
};
DesignMatrix run_design_matrix(const Corpus &corpus, const RunOptions &opts);

/// Named architectures; params_k22 is the count with 22 classes.
struct ArchRow {
    ModelRun run;
    std::size_t params_k22 = 0;
};
std::vector<ArchRow> run_arch_sweep(const Corpus &corpus, const std::vector<std::string> &names,
                                    const RunOptions &opts);

/// Labelled CnnOptions variants for the pooling / filters / filter-size / dense-depth studies.
std::vector<std::pair<std::string, nn::CnnOptions>> sweep_variants(const std::string &study);
std::vector<ModelRun> run_cnn_sweep(const Corpus &corpus, const std::vector<std::pair<std::string, nn::CnnOptions>> &variants,
                                    const RunOptions &opts);

struct VolumeRow {
    std::size_t volume = 0;
    ModelRun run;
};
/// Throws PolicyError when a volume exceeds a room's training split.
std::vector<VolumeRow> run_volume_curve(const Corpus &corpus, const std::vector<std::size_t> &volumes,
                                        const RunOptions &opts);

struct Robustness {
    double cnn_clean = 0, cnn_interfered = 0;
    double svm_broad_clean = 0, svm_broad_interfered = 0;
    double svm_narrow_clean = 0, svm_narrow_interfered = 0;
};
/// Trains on clean data; tests on the clean test split and on the same records with an
/// interferer added (identical interferer draws for every method).
Robustness run_robustness(const Corpus &corpus, const sim::Interferer &interferer, const RunOptions &opts);

/// Experiment names accepted by run_experiment.
std::vector<std::string> experiment_names();

struct Report {
    std::string name;
    std::string csv;           ///< with '#' provenance header lines
    std::string summary_json;
};

/// Runs `name` and renders its CSV and JSON summary. Throws ArgumentError for unknown names.
Report run_experiment(const std::string &name, const Corpus &corpus, const RunOptions &opts);

/// Writes <dir>/<name>.csv and <dir>/<name>.json.
void write_report(const Report &report, const std::filesystem::path &dir);

}  // namespace roomrec::experiments
