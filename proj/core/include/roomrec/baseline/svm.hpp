#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace roomrec::baseline {

enum class KernelType { rbf, linear };

struct KernelConfig {
    KernelType type = KernelType::rbf;
    double gamma = 0.0;  ///< <= 0 means 1 / num_features
    double C = 1.0;
    double eps = 1e-3;   ///< KKT stopping tolerance
};

double kernel_value(KernelType type, double gamma, std::span<const double> a, std::span<const double> b);

/// One binary machine separating classes `pos` (+1) and `neg` (-1):
/// f(x) = sum_i coef_i K(sv_i, x) - rho, coef_i = alpha_i * y_i.
struct BinaryMachine {
    int pos = 0, neg = 1;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coef;
    double rho = 0;

    [[nodiscard]] double decision(std::span<const double> x, KernelType type, double gamma) const;
};

/// Result of the dual solver on one binary problem (exposed for verification).
struct BinarySolution {
    std::vector<double> alpha;
    double rho = 0;
    long iterations = 0;
};

/// SMO with second-order working-set selection on
/// min 0.5 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
BinarySolution solve_binary(const std::vector<std::vector<double>> &kernel, std::span<const int> y, double C,
                            double eps);

struct SvmModel {
    KernelType kernel = KernelType::rbf;
    double gamma = 0;
    double C = 1.0;
    std::size_t num_features = 0;
    std::vector<std::string> labels;  ///< class index -> label
    std::vector<BinaryMachine> machines;  ///< one per unordered class pair, (0,1), (0,2), ...

    [[nodiscard]] std::size_t num_classes() const noexcept { return labels.size(); }

    std::string to_json() const;
    static SvmModel from_json(const std::string &text);
};

/// One-vs-one training. `labels` are class indices in [0, class_names.size()).
/// Throws ArgumentError with fewer than two populated classes.
SvmModel svm_train(const std::vector<std::vector<double>> &features, std::span<const int> labels,
                   std::vector<std::string> class_names, const KernelConfig &cfg = {});

struct SvmVote {
    int label = 0;
    std::vector<int> votes;  ///< per class
};

/// Majority vote over all machines; ties go to the lower class index.
/// Throws ShapeError on a feature-length mismatch.
SvmVote svm_vote(const SvmModel &model, std::span<const double> x);
int svm_predict(const SvmModel &model, std::span<const double> x);

}  // namespace roomrec::baseline
