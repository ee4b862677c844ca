#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "roomrec/baseline/mfcc.hpp"
#include "roomrec/baseline/pipeline.hpp"
#include "roomrec/baseline/svm.hpp"
#include "roomrec/error.hpp"
#include "roomrec/sim/echo_sim.hpp"

using namespace roomrec;
using namespace roomrec::baseline;

namespace {

audio::EchoFrame random_frame(std::uint64_t seed, double scale = 0.3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, scale);
    std::vector<double> x(audio::kEchoSamples);
    for (auto &v : x) v = g(rng);
    return audio::EchoFrame(x);
}

/// Direct-summation MFCC: per-bin DFT, triangular mel weights, natural log, orthonormal DCT-II.
std::vector<double> mfcc_oracle(const audio::EchoFrame &frame, const MfccConfig &cfg) {
    const double fs = cfg.sample_rate_hz;
    const std::size_t len = static_cast<std::size_t>(cfg.frame_ms * fs / 1000.0 + 1e-9);
    const std::size_t hop = static_cast<std::size_t>(cfg.hop_ms * fs / 1000.0 + 1e-9);
    const std::size_t frames = (frame.size() - len) / hop + 1;
    const auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    const auto imel = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
    const std::size_t M = cfg.num_filters;
    std::vector<double> pts(M + 2);
    for (std::size_t i = 0; i < M + 2; ++i)
        pts[i] = imel(mel(cfg.low_hz) + (mel(cfg.high_hz) - mel(cfg.low_hz)) * static_cast<double>(i) / (M + 1.0));
    std::vector<double> out;
    for (std::size_t t = 0; t < frames; ++t) {
        std::vector<double> logs(M, 0.0);
        std::vector<double> energy(M, 0.0);
        for (std::size_t k = 0; k <= cfg.fft_len / 2; ++k) {
            const double f = static_cast<double>(k) * fs / static_cast<double>(cfg.fft_len);
            double re = 0, im = 0;
            bool needed = false;
            for (std::size_t m = 0; m < M; ++m) needed = needed || (f > pts[m] && f < pts[m + 2]);
            if (!needed) continue;
            for (std::size_t n = 0; n < len; ++n) {
                const double a = -2.0 * std::numbers::pi * static_cast<double>((k * n) % cfg.fft_len) /
                                 static_cast<double>(cfg.fft_len);
                re += frame.samples()[t * hop + n] * std::cos(a);
                im += frame.samples()[t * hop + n] * std::sin(a);
            }
            const double p = (re * re + im * im) / static_cast<double>(cfg.fft_len);
            for (std::size_t m = 0; m < M; ++m) {
                double w = 0;
                if (f > pts[m] && f <= pts[m + 1]) w = (f - pts[m]) / (pts[m + 1] - pts[m]);
                else if (f > pts[m + 1] && f < pts[m + 2]) w = (pts[m + 2] - f) / (pts[m + 2] - pts[m + 1]);
                energy[m] += w * p;
            }
        }
        for (std::size_t m = 0; m < M; ++m) logs[m] = std::log(std::max(energy[m], 1e-12));
        for (std::size_t c = 0; c < cfg.num_ceps; ++c) {
            double acc = 0;
            for (std::size_t m = 0; m < M; ++m) acc += logs[m] * std::cos(std::numbers::pi * c * (m + 0.5) / M);
            out.push_back(acc * std::sqrt((c == 0 ? 1.0 : 2.0) / M));
        }
    }
    return out;
}

std::vector<std::vector<double>> gram(const std::vector<std::vector<double>> &x, KernelType t, double gamma) {
    std::vector<std::vector<double>> k(x.size(), std::vector<double>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) k[i][j] = kernel_value(t, gamma, x[i], x[j]);
    return k;
}

struct Toy {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};

Toy blobs(std::size_t per_class, std::size_t classes, double spread, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, spread);
    Toy t;
    for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t i = 0; i < per_class; ++i) {
            const double ang = 2 * std::numbers::pi * c / classes;
            t.x.push_back({3 * std::cos(ang) + g(rng), 3 * std::sin(ang) + g(rng)});
            t.y.push_back(static_cast<int>(c));
        }
    return t;
}

}  // namespace

TEST(Mfcc, DefaultFramingGives8FramesOf104Values) {
    const MfccConfig cfg;
    EXPECT_EQ(cfg.frame_len(), 1102u);
    EXPECT_EQ(cfg.hop_len(), 441u);
    EXPECT_EQ(mfcc_frames(4300, cfg), (4300u - 1102u) / 441u + 1u);
    EXPECT_EQ(mfcc(random_frame(1), cfg).size(), 104u);
}

TEST(Mfcc, MatchesDirectSummationOracle) {
    for (const auto &cfg : {MfccConfig::broadband(), MfccConfig::narrowband()}) {
        const auto frame = random_frame(2);
        const auto got = mfcc(frame, cfg);
        const auto want = mfcc_oracle(frame, cfg);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-8) << i;
    }
}

TEST(Mfcc, ZeroFrameGivesOnlyCoefficientZero) {
    const auto c = mfcc(audio::EchoFrame(), MfccConfig{});
    for (std::size_t t = 0; t < 8; ++t) {
        EXPECT_NEAR(c[t * 13], std::log(1e-12) * std::sqrt(26.0), 1e-9);
        for (std::size_t k = 1; k < 13; ++k) EXPECT_NEAR(c[t * 13 + k], 0.0, 1e-9);
    }
}

TEST(Mfcc, ScalingShiftsOnlyC0) {
    const auto a = random_frame(3, 0.3), b = random_frame(3, 0.6);
    const auto ca = mfcc(a), cb = mfcc(b);
    for (std::size_t t = 0; t < 8; ++t) {
        EXPECT_NEAR(cb[t * 13] - ca[t * 13], std::log(4.0) * std::sqrt(26.0), 1e-8);
        for (std::size_t k = 1; k < 13; ++k) EXPECT_NEAR(cb[t * 13 + k], ca[t * 13 + k], 1e-8);
    }
}

TEST(Mfcc, FilterbankTrianglesPeakAtOne) {
    const auto fb = mel_filterbank(MfccConfig::narrowband());
    ASSERT_EQ(fb.size(), 26u);
    for (const auto &row : fb) {
        double peak = 0;
        for (double v : row) {
            EXPECT_GE(v, 0.0);
            peak = std::max(peak, v);
        }
        EXPECT_GT(peak, 0.4);
        EXPECT_LE(peak, 1.0);
    }
    EXPECT_NEAR(mel_to_hz(hz_to_mel(1234.5)), 1234.5, 1e-9);
}

TEST(Mfcc, BandAboveNyquistIsAConfigError) {
    MfccConfig cfg;
    cfg.high_hz = 30000;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = MfccConfig{};
    cfg.num_ceps = 30;
    EXPECT_THROW(mfcc(audio::EchoFrame(), cfg), ConfigError);
}

TEST(Svm, RbfGramMatrixIsPositiveSemidefinite) {
    const auto t = blobs(10, 3, 1.0, 4);
    auto k = gram(t.x, KernelType::rbf, 0.5);
    const std::size_t n = k.size();
    // Cholesky of K + tiny ridge must succeed, and K must be symmetric
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) EXPECT_DOUBLE_EQ(k[i][j], k[j][i]);
        k[i][i] += 1e-10;
    }
    std::vector<std::vector<double>> L(n, std::vector<double>(n, 0));
    for (std::size_t j = 0; j < n; ++j) {
        double d = k[j][j];
        for (std::size_t p = 0; p < j; ++p) d -= L[j][p] * L[j][p];
        ASSERT_GT(d, 0.0) << "pivot " << j;
        L[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = k[i][j];
            for (std::size_t p = 0; p < j; ++p) s -= L[i][p] * L[j][p];
            L[i][j] = s / L[j][j];
        }
    }
}

TEST(Svm, SolutionSatisfiesKkt) {
    auto t = blobs(30, 2, 1.5, 5);  // overlapping: some alphas hit C
    std::vector<int> y;
    for (int c : t.y) y.push_back(c == 0 ? 1 : -1);
    const double C = 1.0, eps = 1e-3;
    const auto K = gram(t.x, KernelType::rbf, 0.5);
    const auto sol = solve_binary(K, y, C, eps);
    double balance = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        EXPECT_GE(sol.alpha[i], 0.0);
        EXPECT_LE(sol.alpha[i], C);
        balance += sol.alpha[i] * y[i];
    }
    EXPECT_NEAR(balance, 0.0, 1e-9);
    std::size_t at_bound = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double f = -sol.rho;
        for (std::size_t j = 0; j < y.size(); ++j) f += sol.alpha[j] * y[j] * K[i][j];
        const double margin = y[i] * f;
        if (sol.alpha[i] <= 0.0) EXPECT_GE(margin, 1.0 - eps * 2) << i;
        else if (sol.alpha[i] >= C) { EXPECT_LE(margin, 1.0 + eps * 2) << i; ++at_bound; }
        else EXPECT_NEAR(margin, 1.0, eps * 2) << i;
    }
    EXPECT_GT(at_bound, 0u);
}

TEST(Svm, SeparableToyIsFitExactly) {
    const auto t = blobs(20, 2, 0.3, 6);
    const auto m = svm_train(t.x, t.y, {"a", "b"}, {KernelType::linear, 0, 10.0, 1e-3});
    for (std::size_t i = 0; i < t.x.size(); ++i) EXPECT_EQ(svm_predict(m, t.x[i]), t.y[i]);
    for (const auto &sv : m.machines[0].support_vectors) {
        const auto it = std::find(t.x.begin(), t.x.end(), sv);
        ASSERT_NE(it, t.x.end());
        EXPECT_EQ(svm_predict(m, sv), t.y[static_cast<std::size_t>(it - t.x.begin())]);
    }
}

TEST(Svm, DuplicatingEveryPointKeepsTheDecisionFunction) {
    const auto t = blobs(15, 2, 0.4, 7);
    Toy d = t;
    d.x.insert(d.x.end(), t.x.begin(), t.x.end());
    d.y.insert(d.y.end(), t.y.begin(), t.y.end());
    const KernelConfig cfg{KernelType::rbf, 0.5, 100.0, 1e-6};
    const auto a = svm_train(t.x, t.y, {"a", "b"}, cfg);
    const auto b = svm_train(d.x, d.y, {"a", "b"}, cfg);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> x{u(rng), u(rng)};
        EXPECT_NEAR(a.machines[0].decision(x, cfg.type, cfg.gamma), b.machines[0].decision(x, cfg.type, cfg.gamma),
                    1e-3);
    }
}

TEST(Svm, MulticlassVotesAgreeWithKernelExpansion) {
    const auto t = blobs(12, 4, 0.8, 8);
    const auto m = svm_train(t.x, t.y, {"a", "b", "c", "d"});
    ASSERT_EQ(m.machines.size(), 6u);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int i = 0; i < 40; ++i) {
        const std::vector<double> x{u(rng), u(rng)};
        std::vector<int> votes(4, 0);
        for (const auto &mc : m.machines) {
            double f = -mc.rho;
            for (std::size_t s = 0; s < mc.support_vectors.size(); ++s)
                f += mc.coef[s] * std::exp(-m.gamma * (std::pow(x[0] - mc.support_vectors[s][0], 2) +
                                                       std::pow(x[1] - mc.support_vectors[s][1], 2)));
            ++votes[f > 0 ? mc.pos : mc.neg];
        }
        const auto v = svm_vote(m, x);
        EXPECT_EQ(v.votes, votes);
        EXPECT_EQ(v.label, static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
        int total = 0;
        for (int c : v.votes) total += c;
        EXPECT_EQ(total, 6);
    }
    EXPECT_THROW(svm_vote(m, std::vector<double>{1.0}), ShapeError);
}

TEST(Svm, NeedsTwoPopulatedClasses) {
    const std::vector<std::vector<double>> x{{0, 0}, {1, 1}};
    EXPECT_THROW(svm_train(x, std::vector<int>{0, 0}, {"a"}), ArgumentError);
    EXPECT_THROW(svm_train(x, std::vector<int>{0, 0}, {"a", "b"}), ArgumentError);
}

TEST(Svm, JsonRoundTripPredictsIdentically) {
    const auto t = blobs(10, 3, 0.8, 9);
    const auto m = svm_train(t.x, t.y, {"a", "b", "c"});
    const auto back = SvmModel::from_json(m.to_json());
    for (const auto &x : t.x) EXPECT_EQ(svm_predict(back, x), svm_predict(m, x));
}

TEST(Pipeline, MfccSvmSeparatesDistinctRooms) {
    const auto rooms = sim::default_profiles(3);
    std::vector<audio::AudioRecord> tr, te;
    std::vector<int> ytr, yte;
    for (int r = 0; r < 3; ++r)
        for (int i = 0; i < 40; ++i) {
            auto rng = sim::record_rng(11, r, i);
            (i < 30 ? tr : te).push_back(sim::synth_record(rooms[r], sim::CaptureContext{}, rng));
            (i < 30 ? ytr : yte).push_back(r);
        }
    MfccSvmClassifier clf(MfccConfig::narrowband());
    clf.fit(tr, ytr, {"a", "b", "c"});
    EXPECT_GE(clf.accuracy(te, yte), 0.8);
}
