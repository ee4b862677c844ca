#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "roomrec/nn/model_io.hpp"

namespace roomrec::nn {

struct TrainConfig {
    std::size_t batch_size = 100;
    double learning_rate = 0.001;
    long max_steps = 10000;
    long eval_every = 100;
    int patience = 10;  ///< evaluations without validation-loss improvement before stopping
    std::uint64_t seed = 1;
};

struct HistoryRow {
    long step = 0;
    double train_loss = 0;  ///< mean minibatch loss since the previous row (full-set loss at step 0)
    double val_loss = 0;
    double val_acc = 0;
};

struct TrainResult {
    ModelBundle model;  ///< parameters from the evaluation with the lowest validation loss
    std::vector<HistoryRow> history;
    long steps = 0;
    long best_step = 0;
    double initial_train_loss = 0;  ///< inference-mode loss over the training set before step 1
    double final_train_loss = 0;    ///< same, for the returned parameters
};

/// Minibatch SGD on softmax cross-entropy. Inputs are z-scored with training statistics, which
/// are stored in the returned bundle. Throws TrainingError on a non-finite loss.
TrainResult train(const CnnArch &arch, const Dataset &train_set, const Dataset &val_set,
                  std::vector<data::RoomLabel> labels, InputKind input, const TrainConfig &cfg = {},
                  const std::function<void(const HistoryRow &)> &on_eval = {});

struct Evaluation {
    double accuracy = 0;
    double loss = 0;
    std::vector<std::vector<std::size_t>> confusion;  ///< [true][predicted]
};

Evaluation evaluate(const ModelBundle &model, const Dataset &data);

struct Prediction {
    std::size_t class_index = 0;
    std::string label;
    double probability = 0;
};

/// The k most probable classes for one raw feature row, best first.
std::vector<Prediction> predict_topk(const ModelBundle &model, std::span<const float> features, std::size_t k);

/// `step,train_loss,val_loss,val_acc` with a header row.
void write_history_csv(std::ostream &out, const std::vector<HistoryRow> &history);

}  // namespace roomrec::nn
