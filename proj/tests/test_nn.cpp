#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "roomrec/audio/framing.hpp"
#include "roomrec/audio/spectral.hpp"
#include "roomrec/error.hpp"
#include "roomrec/nn/arch.hpp"
#include "roomrec/nn/features.hpp"
#include "roomrec/nn/model_io.hpp"
#include "roomrec/nn/ops.hpp"
#include "roomrec/nn/train.hpp"
#include "roomrec/sim/echo_sim.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace roomrec;
using namespace roomrec::nn;
using testsupport::check_gradients;

namespace {

Tensor<double> random_tensor(Shape s, std::uint64_t seed) {
    Tensor<double> t(std::move(s));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 1);
    for (auto &v : t.data()) v = g(rng);
    return t;
}

double max_abs_diff(const Tensor<double> &a, const Tensor<double> &b) {
    EXPECT_EQ(a.shape(), b.shape());
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

LayerSpec conv(std::string name, std::size_t f, std::size_t k, Padding p = Padding::same, bool relu = true) {
    return {.kind = LayerKind::conv, .name = std::move(name), .filters = f, .kernel_h = k, .kernel_w = k, .padding = p,
            .relu = relu};
}
LayerSpec pool(std::string name) {
    return {.kind = LayerKind::maxpool, .name = std::move(name), .kernel_h = 2, .kernel_w = 2};
}
LayerSpec flat() { return {.kind = LayerKind::flatten, .name = "flatten"}; }
LayerSpec dense(std::string name, std::size_t units, bool relu = true) {
    return {.kind = LayerKind::dense, .name = std::move(name), .units = units, .relu = relu};
}
LayerSpec drop(double rate) { return {.kind = LayerKind::dropout, .name = "dropout", .rate = rate}; }
LayerSpec soft() { return {.kind = LayerKind::softmax, .name = "softmax"}; }

CnnArch make_arch(Dims in, std::size_t k, std::vector<LayerSpec> layers) {
    CnnArch a;
    a.name = "test";
    a.input = in;
    a.num_classes = k;
    a.layers = std::move(layers);
    a.validate();
    return a;
}

}  // namespace

// ---- layer forward passes against nested-loop oracles --------------------------------------

TEST(Ops, Conv2dSameMatchesOracle) {
    for (auto [h, w, c, f, k] : std::vector<std::array<std::size_t, 5>>{
             {32, 5, 1, 16, 4}, {16, 3, 16, 32, 4}, {7, 7, 2, 3, 3}, {5, 6, 3, 2, 2}, {4, 4, 1, 1, 5}}) {
        const auto in = random_tensor({h, w, c}, h * 100 + c);
        const auto ker = random_tensor({f, k, k, c}, f * 10 + k);
        const auto b = random_tensor({f}, 3);
        const auto got = conv2d(in, ker, b, Padding::same);
        EXPECT_LT(max_abs_diff(got, testsupport::naive_conv2d(in, ker, b, true)), 1e-12)
            << h << "x" << w << "x" << c << " f=" << f << " k=" << k;
    }
}

TEST(Ops, Conv2dValidMatchesOracle) {
    const auto in = random_tensor({9, 6, 2}, 1);
    const auto ker = random_tensor({4, 3, 3, 2}, 2);
    const auto b = random_tensor({4}, 3);
    const auto got = conv2d(in, ker, b, Padding::valid);
    EXPECT_EQ(got.shape(), (Shape{7, 4, 4}));
    EXPECT_LT(max_abs_diff(got, testsupport::naive_conv2d(in, ker, b, false)), 1e-12);
}

TEST(Ops, Conv2dRejectsMismatchedChannels) {
    EXPECT_THROW(conv2d(random_tensor({4, 4, 2}, 1), random_tensor({1, 3, 3, 3}, 2), random_tensor({1}, 3)),
                 ShapeError);
}

TEST(Ops, MaxpoolMatchesOracleAndDropsOddEdges) {
    for (auto [h, w, c] : std::vector<std::array<std::size_t, 3>>{{32, 5, 16}, {16, 3, 32}, {5, 5, 1}, {2, 2, 3}}) {
        const auto in = random_tensor({h, w, c}, h + w + c);
        const auto got = maxpool(in, 2, 2);
        EXPECT_EQ(got.shape(), (Shape{h / 2, w / 2, c}));
        EXPECT_EQ(max_abs_diff(got, testsupport::naive_maxpool(in, 2, 2)), 0.0);
    }
}

TEST(Ops, DenseAndRelu) {
    const auto x = random_tensor({6}, 1);
    const auto W = random_tensor({4, 6}, 2);
    const auto b = random_tensor({4}, 3);
    const auto y = dense(x, W, b);
    for (std::size_t o = 0; o < 4; ++o) {
        double acc = b[o];
        for (std::size_t i = 0; i < 6; ++i) acc += W[o * 6 + i] * x[i];
        EXPECT_NEAR(y[o], acc, 1e-12);
    }
    const auto r = relu(y);
    for (std::size_t o = 0; o < 4; ++o) EXPECT_EQ(r[o], std::max(0.0, y[o]));
}

TEST(Ops, SoftmaxCrossEntropyIsStable) {
    const std::vector<double> logits{1000.0, 1001.0, 999.0};
    const auto s = softmax_xent<double>(logits, 1);
    const double z = std::exp(-1.0) + 1.0 + std::exp(-2.0);
    EXPECT_NEAR(s.loss, std::log(z), 1e-12);
    EXPECT_NEAR(s.probs[1], 1.0 / z, 1e-12);
    EXPECT_NEAR(s.grad[1], 1.0 / z - 1.0, 1e-12);
    EXPECT_NEAR(std::accumulate(s.probs.begin(), s.probs.end(), 0.0), 1.0, 1e-12);
}

TEST(Ops, DropoutKeepsTheExpectationMonteCarlo) {
    Tensor<double> x({20000}, 1.0);
    std::mt19937_64 rng(42);
    const double rate = 0.4;
    const auto y = dropout(x, rate, Mode::training, rng);
    std::size_t zeros = 0;
    double sum = 0;
    for (double v : y.data()) {
        if (v == 0.0) ++zeros;
        else EXPECT_NEAR(v, 1.0 / 0.6, 1e-12);
        sum += v;
    }
    // 4 sigma bounds for a Bernoulli(0.4) count over 20000 draws
    const double sigma = std::sqrt(20000 * 0.4 * 0.6);
    EXPECT_NEAR(static_cast<double>(zeros), 8000.0, 4 * sigma);
    EXPECT_NEAR(sum / 20000.0, 1.0, 4 * sigma / 20000.0 / 0.6);
    EXPECT_EQ(dropout(x, rate, Mode::inference, rng), x);
}

// ---- architectures ---------------------------------------------------------------------------

TEST(Arch, CnnCHas294214ParametersAt22Rooms) {
    // hand count: conv 4x4x1x16, conv 4x4x16x32, two 2x2 pools take 32x5 to 8x1, dense 256->1024, dense 1024->22
    const std::size_t expected = (4 * 4 * 1 * 16 + 16) + (4 * 4 * 16 * 32 + 32) + (8 * 1 * 32 * 1024 + 1024) +
                                 (1024 * 22 + 22);
    EXPECT_EQ(expected, 294214u);
    EXPECT_EQ(count_params(build_named_arch("CNN-C", 22)), expected);
    EXPECT_EQ(count_params(build_named_arch("C", 22)), expected);
}

TEST(Arch, NamedArchsChainAndRoundTripThroughJson) {
    for (const auto &n : named_archs()) {
        const auto a = build_named_arch(n, 10);
        EXPECT_NO_THROW(a.validate()) << n;
        EXPECT_EQ(CnnArch::from_json(a.to_json()), a) << n;
        EXPECT_EQ(a.output_dims().back().size(), 10u) << n;
    }
    EXPECT_THROW(build_named_arch("CNN-Z", 10), ArgumentError);
}

TEST(Arch, InvalidStacksAreRejected) {
    CnnArch a = build_named_arch("CNN-C", 5);
    a.layers.pop_back();  // softmax
    a.layers.back().units = 7;
    EXPECT_ANY_THROW(a.validate());
    CnnArch b;
    b.input = kSpectrogramInput;
    b.num_classes = 3;
    b.layers = {dense("d", 3, false)};
    EXPECT_ANY_THROW(b.validate());  // dense on a rank-3 input needs a flatten first
}

// ---- gradients ---------------------------------------------------------------------------------

TEST(Gradients, DenseStack) {
    const auto a = make_arch({1, 6, 1}, 3, {flat(), dense("d1", 5), dense("d2", 3, false), soft()});
    const auto r = check_gradients(a, 1, 4, 1000);
    EXPECT_LT(r.worst, 1e-4) << r.worst_param;
}

TEST(Gradients, ConvSameAndValid) {
    const auto a = make_arch({6, 5, 2}, 3,
                             {conv("c1", 3, 3), conv("c2", 2, 2, Padding::valid), flat(), dense("out", 3, false)});
    const auto r = check_gradients(a, 2, 3, 1000);
    EXPECT_LT(r.worst, 1e-4) << r.worst_param;
}

TEST(Gradients, MaxPool) {
    const auto a = make_arch({6, 5, 1}, 2, {conv("c1", 2, 4), pool("p1"), flat(), dense("out", 2, false)});
    const auto r = check_gradients(a, 3, 3, 1000);
    EXPECT_LT(r.worst, 1e-4) << r.worst_param;
}

TEST(Gradients, DropoutWithFixedMask) {
    const auto a = make_arch({1, 8, 1}, 3, {flat(), dense("d1", 12), drop(0.4), dense("out", 3, false)});
    const auto r = check_gradients(a, 4, 5, 1000, 99);
    EXPECT_LT(r.worst, 1e-4) << r.worst_param;
}

TEST(Gradients, OneDimensionalPsdNetwork) {
    CnnOptions o;
    o.input = {1, 20, 1};
    o.one_dimensional = true;
    o.conv_filters = {3, 4};
    o.dense_units = 16;
    const auto r = check_gradients(build_cnn(o, 3, "psd-small"), 5, 3, 200);
    EXPECT_LT(r.worst, 1e-4) << r.worst_param;
}

TEST(Gradients, FullCnnC) {
    const auto r = check_gradients(build_named_arch("CNN-C", 4), 11, 3, 150, 7);
    EXPECT_LT(r.worst, 1e-4) << r.worst_param;
}

// ---- network, features, persistence ------------------------------------------------------------

TEST(Network, LogitsAgreeWithLossAndFloatCast) {
    Network<double> net(build_named_arch("CNN-A", 4));
    net.init(3);
    std::vector<double> x(2 * 160);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0, 1);
    for (auto &v : x) v = g(rng);
    const auto logits = net.logits(x, 2);
    ASSERT_EQ(logits.size(), 8u);
    const std::vector<int> y{1, 3};
    double want = 0;
    for (int i = 0; i < 2; ++i)
        want += softmax_xent<double>(std::span(logits).subspan(i * 4, 4), static_cast<std::size_t>(y[i])).loss;
    EXPECT_NEAR(net.loss_and_gradients(x, y, std::nullopt, nullptr), want / 2, 1e-12);
    const auto f = net.cast<float>();
    std::vector<float> xf(x.begin(), x.end());
    const auto lf = f.logits(xf, 2);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(lf[i], logits[i], 1e-3);
}

TEST(Network, GlorotInitIsSeededAndBounded) {
    Network<double> a(build_named_arch("CNN-C", 5)), b(build_named_arch("CNN-C", 5));
    a.init(8);
    b.init(8);
    for (std::size_t i = 0; i < a.params().size(); ++i) EXPECT_EQ(a.params()[i].value, b.params()[i].value);
    const auto &k = a.params()[0].value;  // conv1 kernel 16x4x4x1
    const double limit = std::sqrt(6.0 / (16.0 + 16.0 * 16.0));
    for (double v : k.data()) EXPECT_LE(std::abs(v), limit);
}

TEST(Features, SpectrogramFeaturesAreTheGrid) {
    auto rng = sim::record_rng(1, 0, 0);
    const auto rec = sim::synth_record(sim::default_profiles(1)[0], sim::CaptureContext{}, rng);
    const auto f = extract_features(rec, InputKind::spectrogram);
    ASSERT_EQ(f.size(), 160u);
    const auto spec = audio::spectrogram(audio::echo_frame(rec));
    for (std::size_t i = 0; i < 160; ++i) EXPECT_FLOAT_EQ(f[i], static_cast<float>(spec.grid[i]));
    const auto p = extract_features(rec, InputKind::psd);
    ASSERT_EQ(p.size(), 147u);
    const auto psd = audio::psd_narrowband(audio::echo_frame(rec));
    EXPECT_FLOAT_EQ(p[3], static_cast<float>(10 * std::log10(psd.values[3] + 1e-12)));
    EXPECT_EQ(input_kind_from_string("psd"), InputKind::psd);
    EXPECT_THROW(input_kind_from_string("mel"), FormatError);
}

TEST(Features, NormalizerHandlesConstantColumns) {
    Dataset d;
    d.dim = 2;
    d.append(std::vector<float>{1, 5}, 0);
    d.append(std::vector<float>{3, 5}, 1);
    const auto n = Normalizer::fit(d);
    EXPECT_DOUBLE_EQ(n.mean[0], 2.0);
    EXPECT_DOUBLE_EQ(n.stddev[0], 1.0);
    EXPECT_DOUBLE_EQ(n.stddev[1], 1.0);
    const auto out = n.apply_all(d.x);
    EXPECT_FLOAT_EQ(out[0], -1.0f);
    EXPECT_FLOAT_EQ(out[1], 0.0f);
}

namespace {

ModelBundle small_bundle() {
    ModelBundle m;
    m.net = Network<float>(build_named_arch("CNN-A", 3));
    m.net.init(4);
    m.labels = {{"a", 0}, {"b", 1}, {"c", 2}};
    m.normalizer.mean.assign(160, 0.5);
    m.normalizer.stddev.assign(160, 2.0);
    m.version = 7;
    return m;
}

}  // namespace

TEST(ModelIo, RoundTripIsExact) {
    const auto m = small_bundle();
    const auto bytes = serialize_model(m);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RRM1");
    const auto back = deserialize_model(bytes);
    EXPECT_EQ(back.version, 7u);
    EXPECT_EQ(back.labels, m.labels);
    EXPECT_EQ(back.arch(), m.arch());
    for (std::size_t i = 0; i < m.net.params().size(); ++i)
        EXPECT_EQ(back.net.params()[i].value, m.net.params()[i].value);
    EXPECT_EQ(serialize_model(back), bytes);
}

TEST(ModelIo, CorruptionNamesTheField) {
    auto bytes = serialize_model(small_bundle());
    auto bad = bytes;
    bad[0] = 'X';
    try {
        deserialize_model(bad);
        FAIL();
    } catch (const FormatError &e) {
        EXPECT_EQ(e.field(), "magic");
    }
    auto cut = bytes;
    cut.resize(cut.size() - 4);
    EXPECT_THROW(deserialize_model(cut), FormatError);
}

TEST(Train, LearnsASeparableProblemAndKeepsTheBestSnapshot) {
    // three rooms whose spectrogram rows differ by a constant offset
    std::mt19937_64 rng(5);
    std::normal_distribution<float> g(0, 1);
    Dataset tr, va;
    tr.dim = va.dim = 160;
    for (int i = 0; i < 300; ++i) {
        std::vector<float> row(160);
        const int c = i % 3;
        for (std::size_t j = 0; j < 160; ++j) row[j] = g(rng) + (j % 5 == static_cast<std::size_t>(c) ? 2.0f : 0.0f);
        (i < 240 ? tr : va).append(row, c);
    }
    TrainConfig cfg;
    cfg.max_steps = 400;
    cfg.eval_every = 50;
    std::vector<HistoryRow> seen;
    const auto res = train(build_named_arch("DNN-spec", 3), tr, va, {{"a", 0}, {"b", 1}, {"c", 2}},
                           InputKind::spectrogram, cfg, [&](const HistoryRow &h) { seen.push_back(h); });
    ASSERT_FALSE(res.history.empty());
    EXPECT_EQ(res.history.front().step, 0);
    EXPECT_EQ(seen.size(), res.history.size());
    EXPECT_LT(res.final_train_loss, res.initial_train_loss);
    const auto best = std::min_element(res.history.begin(), res.history.end(),
                                       [](const auto &a, const auto &b) { return a.val_loss < b.val_loss; });
    EXPECT_EQ(res.best_step, best->step);
    const auto ev = evaluate(res.model, va);
    EXPECT_NEAR(ev.loss, best->val_loss, 1e-4);
    EXPECT_GT(ev.accuracy, 0.9);
    const auto top = predict_topk(res.model, va.row(0), 5);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_GE(top[0].probability, top[1].probability);
    EXPECT_GE(top[1].probability, top[2].probability);
}

TEST(Train, SameSeedSameModel) {
    Dataset tr;
    tr.dim = 160;
    std::mt19937_64 rng(6);
    std::normal_distribution<float> g(0, 1);
    for (int i = 0; i < 40; ++i) {
        std::vector<float> row(160);
        for (auto &v : row) v = g(rng) + static_cast<float>(i % 2);
        tr.append(row, i % 2);
    }
    TrainConfig cfg;
    cfg.max_steps = 30;
    cfg.eval_every = 10;
    cfg.batch_size = 10;
    const auto a = train(build_named_arch("CNN-A", 2), tr, tr, {{"x", 0}, {"y", 1}}, InputKind::spectrogram, cfg);
    const auto b = train(build_named_arch("CNN-A", 2), tr, tr, {{"x", 0}, {"y", 1}}, InputKind::spectrogram, cfg);
    EXPECT_EQ(serialize_model(a.model), serialize_model(b.model));
}
