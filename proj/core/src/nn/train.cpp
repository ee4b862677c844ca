#include "roomrec/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "roomrec/error.hpp"

namespace roomrec::nn {

namespace {

constexpr std::size_t kEvalChunk = 500;

struct LossAcc {
    double loss = 0;
    double acc = 0;
};

LossAcc score(const Network<float> &net, const std::vector<float> &x, const std::vector<int> &y) {
    const std::size_t dim = net.input_size();
    const std::size_t k = net.num_classes();
    double loss = 0;
    std::size_t hits = 0;
    for (std::size_t off = 0; off < y.size(); off += kEvalChunk) {
        const std::size_t n = std::min(kEvalChunk, y.size() - off);
        const auto z = net.logits(std::span(x).subspan(off * dim, n * dim), n);
        for (std::size_t s = 0; s < n; ++s) {
            const float *zs = z.data() + s * k;
            const auto best = static_cast<std::size_t>(std::max_element(zs, zs + k) - zs);
            const double mx = zs[best];
            double sum = 0;
            for (std::size_t j = 0; j < k; ++j) sum += std::exp(zs[j] - mx);
            loss += std::log(sum) - (zs[y[off + s]] - mx);
            if (best == static_cast<std::size_t>(y[off + s])) ++hits;
        }
    }
    const double n = static_cast<double>(y.size());
    return {loss / n, static_cast<double>(hits) / n};
}

void check_dataset(const Dataset &d, const CnnArch &arch, const char *what) {
    if (d.empty()) throw ArgumentError(std::string(what) + " set is empty");
    if (d.dim != arch.input.size())
        throw ShapeError(std::string(what) + " features have width " + std::to_string(d.dim) + ", network expects " +
                         std::to_string(arch.input.size()));
    for (int y : d.y)
        if (y < 0 || static_cast<std::size_t>(y) >= arch.num_classes)
            throw ArgumentError(std::string(what) + " set has label " + std::to_string(y) + " outside [0, K)");
}

}  // namespace

TrainResult train(const CnnArch &arch, const Dataset &train_set, const Dataset &val_set,
                  std::vector<data::RoomLabel> labels, InputKind input, const TrainConfig &cfg,
                  const std::function<void(const HistoryRow &)> &on_eval) {
    arch.validate();
    check_dataset(train_set, arch, "training");
    check_dataset(val_set, arch, "validation");
    if (labels.size() != arch.num_classes) throw ArgumentError("label list does not match K");
    if (cfg.batch_size == 0 || cfg.max_steps <= 0 || cfg.eval_every <= 0 || cfg.patience <= 0 ||
        !(cfg.learning_rate > 0))
        throw ArgumentError("training configuration values must be positive");

    TrainResult res;
    res.model.labels = std::move(labels);
    res.model.input = input;
    res.model.normalizer = Normalizer::fit(train_set);
    res.model.net = Network<float>(arch);
    res.model.net.init(cfg.seed);
    auto &net = res.model.net;

    const auto xtr = res.model.normalizer.apply_all(train_set.x);
    const auto xva = res.model.normalizer.apply_all(val_set.x);
    const std::size_t dim = train_set.dim;
    const std::size_t n_train = train_set.size();
    const std::size_t batch = std::min(cfg.batch_size, n_train);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t cursor = 0;

    res.initial_train_loss = score(net, xtr, train_set.y).loss;
    const auto v0 = score(net, xva, val_set.y);
    res.history.push_back({0, res.initial_train_loss, v0.loss, v0.acc});
    if (on_eval) on_eval(res.history.back());

    double best_val = v0.loss;
    auto best_params = net.params();
    int stale = 0;
    double running = 0;
    long running_n = 0;

    std::vector<float> xb(batch * dim);
    std::vector<int> yb(batch);
    auto grads = net.zero_gradients();
    const float lr = static_cast<float>(cfg.learning_rate);

    for (long step = 1; step <= cfg.max_steps; ++step) {
        for (std::size_t b = 0; b < batch; ++b) {
            if (cursor == n_train) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            const std::size_t i = order[cursor++];
            std::copy_n(xtr.begin() + static_cast<std::ptrdiff_t>(i * dim), dim,
                        xb.begin() + static_cast<std::ptrdiff_t>(b * dim));
            yb[b] = train_set.y[i];
        }
        const float loss = net.loss_and_gradients(xb, yb, rng(), &grads);
        if (!std::isfinite(loss)) throw TrainingError(step, "loss became non-finite");
        for (std::size_t p = 0; p < grads.size(); ++p) {
            auto w = net.params()[p].value.data();
            auto g = grads[p].data();
            for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
        }
        running += loss;
        ++running_n;
        res.steps = step;

        if (step % cfg.eval_every == 0 || step == cfg.max_steps) {
            const auto v = score(net, xva, val_set.y);
            res.history.push_back({step, running / static_cast<double>(running_n), v.loss, v.acc});
            if (on_eval) on_eval(res.history.back());
            running = 0;
            running_n = 0;
            if (!std::isfinite(v.loss)) throw TrainingError(step, "validation loss became non-finite");
            if (v.loss < best_val) {
                best_val = v.loss;
                best_params = net.params();
                res.best_step = step;
                stale = 0;
            } else if (++stale >= cfg.patience) {
                break;
            }
        }
    }
    net.params() = std::move(best_params);
    res.final_train_loss = score(net, xtr, train_set.y).loss;
    return res;
}

Evaluation evaluate(const ModelBundle &model, const Dataset &data) {
    if (data.empty()) throw ArgumentError("evaluation set is empty");
    const std::size_t k = model.num_classes();
    Evaluation ev;
    ev.confusion.assign(k, std::vector<std::size_t>(k, 0));
    std::size_t hits = 0;
    double loss = 0;
    for (std::size_t off = 0; off < data.size(); off += kEvalChunk) {
        const std::size_t n = std::min(kEvalChunk, data.size() - off);
        const auto p = model.probabilities(std::span(data.x).subspan(off * data.dim, n * data.dim), n);
        for (std::size_t s = 0; s < n; ++s) {
            const double *ps = p.data() + s * k;
            const auto pred = static_cast<std::size_t>(std::max_element(ps, ps + k) - ps);
            const auto truth = static_cast<std::size_t>(data.y[off + s]);
            if (truth >= k) throw ArgumentError("label outside [0, K)");
            ++ev.confusion[truth][pred];
            if (pred == truth) ++hits;
            loss -= std::log(std::max(ps[truth], 1e-300));
        }
    }
    ev.accuracy = static_cast<double>(hits) / static_cast<double>(data.size());
    ev.loss = loss / static_cast<double>(data.size());
    return ev;
}

std::vector<Prediction> predict_topk(const ModelBundle &model, std::span<const float> features, std::size_t k) {
    const auto p = model.probabilities(features, 1);
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    idx.resize(std::min(k, idx.size()));
    std::vector<Prediction> out;
    for (auto i : idx) out.push_back({i, model.labels.at(i).label_id, p[i]});
    return out;
}

void write_history_csv(std::ostream &out, const std::vector<HistoryRow> &history) {
    out << "step,train_loss,val_loss,val_acc\n";
    for (const auto &r : history) out << r.step << ',' << r.train_loss << ',' << r.val_loss << ',' << r.val_acc << '\n';
}

}  // namespace roomrec::nn
