#include "roomrec/baseline/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "roomrec/error.hpp"

namespace roomrec::baseline {

using nlohmann::json;

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double kernel_value(KernelType type, double gamma, std::span<const double> a, std::span<const double> b) {
    double acc = 0;
    if (type == KernelType::linear) {
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
        return acc;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::exp(-gamma * acc);
}

double BinaryMachine::decision(std::span<const double> x, KernelType type, double gamma) const {
    double f = -rho;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) f += coef[i] * kernel_value(type, gamma, support_vectors[i], x);
    return f;
}

BinarySolution solve_binary(const std::vector<std::vector<double>> &K, std::span<const int> y, double C, double eps) {
    const std::size_t l = y.size();
    if (K.size() != l) throw ShapeError("kernel matrix does not match label count");
    BinarySolution sol;
    auto &a = sol.alpha;
    a.assign(l, 0.0);
    std::vector<double> G(l, -1.0);
    auto Q = [&](std::size_t i, std::size_t j) { return static_cast<double>(y[i] * y[j]) * K[i][j]; };
    auto upper = [&](std::size_t t) { return a[t] >= C; };
    auto lower = [&](std::size_t t) { return a[t] <= 0; };

    const long max_iter = std::max<long>(10000000, l > 21474836 ? std::numeric_limits<long>::max() : 100 * static_cast<long>(l));
    for (; sol.iterations < max_iter; ++sol.iterations) {
        double gmax = -kInf, gmax2 = -kInf;
        long gi = -1, gj = -1;
        for (std::size_t t = 0; t < l; ++t) {
            if (y[t] == +1) {
                if (!upper(t) && -G[t] >= gmax) gmax = -G[t], gi = static_cast<long>(t);
            } else {
                if (!lower(t) && G[t] >= gmax) gmax = G[t], gi = static_cast<long>(t);
            }
        }
        double obj_min = kInf;
        for (std::size_t t = 0; t < l; ++t) {
            const std::size_t i = static_cast<std::size_t>(std::max<long>(gi, 0));
            if (y[t] == +1) {
                if (lower(t)) continue;
                const double diff = gmax + G[t];
                gmax2 = std::max(gmax2, G[t]);
                if (gi >= 0 && diff > 0) {
                    double quad = K[i][i] + K[t][t] - 2.0 * y[i] * Q(i, t);
                    if (quad <= 0) quad = kTau;
                    const double obj = -(diff * diff) / quad;
                    if (obj <= obj_min) obj_min = obj, gj = static_cast<long>(t);
                }
            } else {
                if (upper(t)) continue;
                const double diff = gmax - G[t];
                gmax2 = std::max(gmax2, -G[t]);
                if (gi >= 0 && diff > 0) {
                    double quad = K[i][i] + K[t][t] + 2.0 * y[i] * Q(i, t);
                    if (quad <= 0) quad = kTau;
                    const double obj = -(diff * diff) / quad;
                    if (obj <= obj_min) obj_min = obj, gj = static_cast<long>(t);
                }
            }
        }
        if (gmax + gmax2 < eps || gi < 0 || gj < 0) break;

        const auto i = static_cast<std::size_t>(gi), j = static_cast<std::size_t>(gj);
        const double old_i = a[i], old_j = a[j];
        if (y[i] != y[j]) {
            double quad = K[i][i] + K[j][j] + 2.0 * Q(i, j);
            if (quad <= 0) quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0) {
                if (a[j] < 0) a[j] = 0, a[i] = diff;
            } else {
                if (a[i] < 0) a[i] = 0, a[j] = -diff;
            }
            if (diff > 0) {
                if (a[i] > C) a[i] = C, a[j] = C - diff;
            } else {
                if (a[j] > C) a[j] = C, a[i] = C + diff;
            }
        } else {
            double quad = K[i][i] + K[j][j] - 2.0 * Q(i, j);
            if (quad <= 0) quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > C) {
                if (a[i] > C) a[i] = C, a[j] = sum - C;
            } else {
                if (a[j] < 0) a[j] = 0, a[i] = sum;
            }
            if (sum > C) {
                if (a[j] > C) a[j] = C, a[i] = sum - C;
            } else {
                if (a[i] < 0) a[i] = 0, a[j] = sum;
            }
        }
        const double di = a[i] - old_i, dj = a[j] - old_j;
        for (std::size_t t = 0; t < l; ++t) G[t] += Q(i, t) * di + Q(j, t) * dj;
    }

    double ub = kInf, lb = -kInf, sum_free = 0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < l; ++t) {
        const double yg = y[t] * G[t];
        if (upper(t)) {
            if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] == +1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    sol.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    return sol;
}

SvmModel svm_train(const std::vector<std::vector<double>> &features, std::span<const int> labels,
                   std::vector<std::string> class_names, const KernelConfig &cfg) {
    if (features.size() != labels.size()) throw ArgumentError("features and labels differ in length");
    if (features.empty()) throw ArgumentError("no training samples");
    const std::size_t dim = features.front().size();
    for (const auto &f : features)
        if (f.size() != dim) throw ShapeError("training features differ in length");
    const int k = static_cast<int>(class_names.size());
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= k) throw ArgumentError("label outside the class table");
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    std::size_t populated = 0;
    for (const auto &m : members) populated += m.empty() ? 0 : 1;
    if (populated < 2) throw ArgumentError("svm training needs at least two classes");
    for (std::size_t c = 0; c < members.size(); ++c)
        if (members[c].empty()) throw ArgumentError("class '" + class_names[c] + "' has no samples");
    if (!(cfg.C > 0) || !(cfg.eps > 0)) throw ArgumentError("C and eps must be positive");

    SvmModel model;
    model.kernel = cfg.type;
    model.gamma = cfg.gamma > 0 ? cfg.gamma : 1.0 / static_cast<double>(dim);
    model.C = cfg.C;
    model.num_features = dim;
    model.labels = std::move(class_names);

    for (int p = 0; p < k; ++p) {
        for (int n = p + 1; n < k; ++n) {
            std::vector<std::size_t> idx = members[static_cast<std::size_t>(p)];
            idx.insert(idx.end(), members[static_cast<std::size_t>(n)].begin(), members[static_cast<std::size_t>(n)].end());
            const std::size_t l = idx.size();
            std::vector<int> y(l);
            for (std::size_t t = 0; t < l; ++t) y[t] = labels[idx[t]] == p ? +1 : -1;
            std::vector<std::vector<double>> K(l, std::vector<double>(l));
            for (std::size_t r = 0; r < l; ++r)
                for (std::size_t c = r; c < l; ++c)
                    K[r][c] = K[c][r] = kernel_value(model.kernel, model.gamma, features[idx[r]], features[idx[c]]);
            const auto sol = solve_binary(K, y, cfg.C, cfg.eps);

            BinaryMachine m;
            m.pos = p;
            m.neg = n;
            m.rho = sol.rho;
            for (std::size_t t = 0; t < l; ++t) {
                if (sol.alpha[t] <= 0) continue;
                m.support_vectors.push_back(features[idx[t]]);
                m.coef.push_back(sol.alpha[t] * y[t]);
            }
            model.machines.push_back(std::move(m));
        }
    }
    return model;
}

SvmVote svm_vote(const SvmModel &model, std::span<const double> x) {
    if (x.size() != model.num_features)
        throw ShapeError("feature has " + std::to_string(x.size()) + " values, model expects " +
                         std::to_string(model.num_features));
    SvmVote v;
    v.votes.assign(model.num_classes(), 0);
    for (const auto &m : model.machines) ++v.votes[static_cast<std::size_t>(m.decision(x, model.kernel, model.gamma) > 0 ? m.pos : m.neg)];
    v.label = static_cast<int>(std::max_element(v.votes.begin(), v.votes.end()) - v.votes.begin());
    return v;
}

int svm_predict(const SvmModel &model, std::span<const double> x) { return svm_vote(model, x).label; }

std::string SvmModel::to_json() const {
    json ms = json::array();
    for (const auto &m : machines)
        ms.push_back({{"pos", m.pos}, {"neg", m.neg}, {"rho", m.rho}, {"coef", m.coef}, {"sv", m.support_vectors}});
    return json{{"kernel", kernel == KernelType::rbf ? "rbf" : "linear"},
                {"gamma", gamma},
                {"C", C},
                {"num_features", num_features},
                {"labels", labels},
                {"machines", ms}}
        .dump();
}

SvmModel SvmModel::from_json(const std::string &text) {
    SvmModel s;
    try {
        const auto j = json::parse(text);
        const auto kernel = j.at("kernel").get<std::string>();
        if (kernel != "rbf" && kernel != "linear") throw FormatError("kernel", "unknown kernel '" + kernel + "'");
        s.kernel = kernel == "rbf" ? KernelType::rbf : KernelType::linear;
        s.gamma = j.at("gamma").get<double>();
        s.C = j.at("C").get<double>();
        s.num_features = j.at("num_features").get<std::size_t>();
        s.labels = j.at("labels").get<std::vector<std::string>>();
        for (const auto &mj : j.at("machines")) {
            BinaryMachine m;
            m.pos = mj.at("pos").get<int>();
            m.neg = mj.at("neg").get<int>();
            m.rho = mj.at("rho").get<double>();
            m.coef = mj.at("coef").get<std::vector<double>>();
            m.support_vectors = mj.at("sv").get<std::vector<std::vector<double>>>();
            if (m.coef.size() != m.support_vectors.size()) throw FormatError("coef", "coefficient count mismatch");
            const auto k = static_cast<int>(s.labels.size());
            if (m.pos < 0 || m.neg < 0 || m.pos >= k || m.neg >= k) throw FormatError("machines", "class out of range");
            for (const auto &sv : m.support_vectors)
                if (sv.size() != s.num_features) throw FormatError("sv", "support vector length mismatch");
            s.machines.push_back(std::move(m));
        }
    } catch (const json::exception &e) {
        throw FormatError("svm", e.what());
    }
    return s;
}

}  // namespace roomrec::baseline
