#pragma once
// Finite-difference check of Network<double>::loss_and_gradients.

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "roomrec/nn/network.hpp"
#include "support/oracles.hpp"

namespace testsupport {

struct GradReport {
    double worst = 0;        ///< largest relative error seen
    std::string worst_param; ///< "<tensor>[index]"
    std::size_t checked = 0;
};

/// Compares analytic gradients with central differences on up to `per_tensor` randomly chosen
/// entries of every parameter tensor (all entries when the tensor is smaller).
inline GradReport check_gradients(const roomrec::nn::CnnArch &arch, std::uint64_t seed, std::size_t batch,
                                  std::size_t per_tensor, std::optional<std::uint64_t> dropout_seed = std::nullopt,
                                  double h = 1e-6) {
    roomrec::nn::Network<double> net(arch);
    net.init(seed);
    std::mt19937_64 rng(seed * 7 + 1);
    std::normal_distribution<double> g(0.0, 1.0);
    // non-zero biases so that padded borders and ReLU thresholds are exercised
    for (auto &p : net.params())
        if (p.name.ends_with("/bias"))
            for (auto &v : p.value.data()) v = 0.1 * g(rng);
    std::vector<double> x(batch * net.input_size());
    for (auto &v : x) v = g(rng);
    std::vector<int> y(batch);
    for (std::size_t i = 0; i < batch; ++i) y[i] = static_cast<int>(i % arch.num_classes);

    auto grads = net.zero_gradients();
    net.loss_and_gradients(x, y, dropout_seed, &grads);
    const auto loss = [&] { return net.loss_and_gradients(x, y, dropout_seed, nullptr); };

    GradReport rep;
    for (std::size_t t = 0; t < net.params().size(); ++t) {
        auto data = net.params()[t].value.data();
        std::vector<std::size_t> idx(data.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        if (idx.size() > per_tensor) {
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(per_tensor);
        }
        for (auto i : idx) {
            const double numeric = central_difference(loss, data[i], h);
            const double err = rel_error(grads[t][i], numeric, 1e-8);
            ++rep.checked;
            if (err > rep.worst) {
                rep.worst = err;
                rep.worst_param = net.params()[t].name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return rep;
}

}  // namespace testsupport
