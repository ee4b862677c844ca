#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "roomrec/error.hpp"
#include "roomrec/experiments/experiments.hpp"
#include "support/harness.hpp"

using namespace roomrec;
using namespace roomrec::experiments;

namespace {

Corpus small_corpus(std::size_t rooms = 3, std::size_t per_room = 40) {
    SynthOptions o;
    o.rooms = rooms;
    o.per_room = per_room;
    o.seed = 11;
    return synth_corpus(o);
}

RunOptions quick() {
    RunOptions r;
    r.seed = 5;
    r.train.max_steps = 60;
    r.train.eval_every = 20;
    r.train.patience = 2;
    return r;
}

std::size_t count(const Corpus &c, data::Split s, int cls) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < c.size(); ++i) n += c.splits[i] == s && c.classes[i] == cls;
    return n;
}

}  // namespace

TEST(Corpus, SplitPolicyFollowsRoomSize) {
    const auto big = small_corpus(2, 1000);
    EXPECT_EQ(count(big, data::Split::train, 0), 500u);
    EXPECT_EQ(count(big, data::Split::val, 1), 250u);
    EXPECT_EQ(count(big, data::Split::test, 1), 250u);
    const auto small = small_corpus(2, 40);
    EXPECT_EQ(count(small, data::Split::train, 0), 20u);
    EXPECT_EQ(count(small, data::Split::val, 0), 10u);
    EXPECT_EQ(count(small, data::Split::test, 0), 10u);
}

TEST(Corpus, SynthesisIsDeterministic) {
    const auto a = small_corpus();
    const auto b = small_corpus();
    EXPECT_EQ(a.hash, b.hash);
    EXPECT_EQ(a.records[7], b.records[7]);
    SynthOptions o;
    o.rooms = 3;
    o.per_room = 40;
    o.seed = 12;
    EXPECT_NE(synth_corpus(o).hash, a.hash);
}

TEST(Corpus, StoreRoundTripKeepsSplitsAndHash) {
    testsupport::TempDir d;
    SynthOptions o;
    o.rooms = 2;
    o.per_room = 12;
    write_synth_store(d.path, o);
    const auto loaded = load_corpus(d.path);
    EXPECT_EQ(loaded.size(), 24u);
    EXPECT_EQ(loaded.num_classes(), 2u);
    EXPECT_NO_THROW(loaded.require_splits());
    EXPECT_EQ(load_corpus(d.path).hash, loaded.hash);
}

TEST(Corpus, MissingSplitIsAPolicyError) {
    auto c = small_corpus(2, 12);
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c.classes[i] == 1 && c.splits[i] == data::Split::test) c.splits[i] = data::Split::train;
    EXPECT_THROW(c.require_splits(), PolicyError);
    EXPECT_THROW(train_and_test(c, nn::build_named_arch("DNN-spec", 2), nn::InputKind::spectrogram, quick()), PolicyError);
}

TEST(Experiments, VolumeBeyondTrainSplitIsRejected) {
    const auto c = small_corpus();
    EXPECT_THROW(run_volume_curve(c, {5, 21}, quick()), PolicyError);
}

TEST(Experiments, SameSeedSameTable) {
    const auto c = small_corpus();
    const auto a = run_experiment("design-matrix", c, quick());
    const auto b = run_experiment("design-matrix", c, quick());
    auto body = [](const std::string &csv) {
        std::istringstream in(csv);
        std::string line, out;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            // drop the timing column, which varies run to run
            out += line.substr(0, line.rfind(',')) + "\n";
        }
        return out;
    };
    EXPECT_EQ(body(a.csv), body(b.csv));
    EXPECT_NE(a.csv.find("# corpus_hash: " + c.hash), std::string::npos) << a.csv;
    EXPECT_NE(a.csv.find("# seed: 5"), std::string::npos);
    const auto j = nlohmann::json::parse(a.summary_json);
    EXPECT_EQ(j["rows"].size(), 4u);
}

TEST(Experiments, UnknownNameAndReportFiles) {
    const auto c = small_corpus();
    EXPECT_THROW(run_experiment("nope", c, quick()), ArgumentError);
    for (const auto &n : {"pooling", "filters", "filter-size", "dense-depth"}) EXPECT_FALSE(sweep_variants(n).empty());
    EXPECT_THROW(sweep_variants("colour"), ArgumentError);

    testsupport::TempDir d;
    Report r{"x", "# a,b\n1,2\n", "{}"};
    write_report(r, d.path);
    std::ifstream csv(d.path / "x.csv");
    std::stringstream ss;
    ss << csv.rdbuf();
    EXPECT_EQ(ss.str(), r.csv);
    EXPECT_TRUE(std::filesystem::exists(d.path / "x.json"));
}

TEST(Experiments, RobustnessUsesTheSameInterfererForAllMethods) {
    const auto c = small_corpus(2, 40);
    sim::Interferer intf;
    const auto r = run_robustness(c, intf, quick());
    for (double v : {r.cnn_clean, r.cnn_interfered, r.svm_broad_clean, r.svm_broad_interfered, r.svm_narrow_clean,
                     r.svm_narrow_interfered}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}
