#include "roomrec/experiments/experiments.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "roomrec/baseline/pipeline.hpp"
#include "roomrec/error.hpp"

namespace roomrec::experiments {

using nlohmann::json;

namespace {

void note(const RunOptions &o, const std::string &msg) {
    if (o.log) o.log(msg);
}

std::vector<audio::AudioRecord> pick(const Corpus &c, const std::vector<std::size_t> &idx) {
    std::vector<audio::AudioRecord> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(c.records[i]);
    return out;
}

std::vector<int> pick_labels(const Corpus &c, const std::vector<std::size_t> &idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(c.classes[i]);
    return out;
}

json run_json(const ModelRun &r) {
    return {{"name", r.name},          {"input", std::string(nn::to_string(r.input))},
            {"params", r.params},      {"test_accuracy", r.accuracy},
            {"seconds", r.seconds},    {"steps", r.steps},
            {"best_step", r.best_step}};
}

std::string run_csv_row(const ModelRun &r) {
    std::ostringstream s;
    s << r.name << ',' << nn::to_string(r.input) << ',' << r.params << ',' << r.accuracy << ',' << r.steps << ','
      << r.best_step << ',' << r.seconds;
    return s.str();
}

constexpr const char *kRunHeader = "model,input,params,test_accuracy,steps,best_step,seconds";

}  // namespace

ModelRun train_and_test(const Corpus &corpus, const nn::CnnArch &arch, nn::InputKind input, const RunOptions &opts,
                        std::optional<std::size_t> per_room_limit) {
    corpus.require_splits();
    const auto train_set = make_features(corpus, data::Split::train, input, per_room_limit, opts.seed);
    const auto val_set = make_features(corpus, data::Split::val, input);
    const auto test_set = make_features(corpus, data::Split::test, input);
    auto cfg = opts.train;
    cfg.seed = opts.seed;
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = nn::train(arch, train_set, val_set, corpus.labels, input, cfg);
    ModelRun r;
    r.name = arch.name;
    r.input = input;
    r.params = count_params(arch);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.steps = res.steps;
    r.best_step = res.best_step;
    r.accuracy = nn::evaluate(res.model, test_set).accuracy;
    note(opts, r.name + " (" + std::string(nn::to_string(input)) + "): test accuracy " + std::to_string(r.accuracy) +
                   " after " + std::to_string(r.steps) + " steps");
    return r;
}

DesignMatrix run_design_matrix(const Corpus &corpus, const RunOptions &opts) {
    corpus.require_splits();
    const auto k = corpus.num_classes();
    DesignMatrix m;
    m.spec_cnn = train_and_test(corpus, nn::build_named_arch("CNN-C", k), nn::InputKind::spectrogram, opts);
    m.spec_dnn = train_and_test(corpus, nn::build_named_arch("DNN-spec", k), nn::InputKind::spectrogram, opts);
    m.psd_cnn = train_and_test(corpus, nn::build_named_arch("CNN-psd", k), nn::InputKind::psd, opts);
    m.psd_dnn = train_and_test(corpus, nn::build_named_arch("DNN-psd", k), nn::InputKind::psd, opts);
    return m;
}

std::vector<ArchRow> run_arch_sweep(const Corpus &corpus, const std::vector<std::string> &names,
                                    const RunOptions &opts) {
    std::vector<ArchRow> rows;
    for (const auto &n : names) {
        const auto arch = nn::build_named_arch(n, corpus.num_classes());
        const auto input = arch.input == nn::kPsdInput ? nn::InputKind::psd : nn::InputKind::spectrogram;
        rows.push_back({train_and_test(corpus, arch, input, opts), count_params(nn::build_named_arch(n, 22))});
    }
    return rows;
}

std::vector<std::pair<std::string, nn::CnnOptions>> sweep_variants(const std::string &study) {
    std::vector<std::pair<std::string, nn::CnnOptions>> v;
    if (study == "pooling") {
        nn::CnnOptions with, without;
        without.pooled_convs = 0;
        v = {{"pooling", with}, {"no-pooling", without}};
    } else if (study == "filters") {
        for (std::size_t f : {8, 16, 32, 64}) {
            nn::CnnOptions o;
            o.conv_filters = {f, 2 * f};
            v.emplace_back("filters-" + std::to_string(f) + "-" + std::to_string(2 * f), o);
        }
    } else if (study == "filter-size") {
        for (std::size_t s : {2, 3, 4, 5}) {
            nn::CnnOptions o;
            o.kernel = s;
            v.emplace_back("kernel-" + std::to_string(s) + "x" + std::to_string(s), o);
        }
    } else if (study == "dense-depth") {
        for (std::size_t d : {1, 2, 3}) {
            nn::CnnOptions o;
            o.dense_layers = d;
            v.emplace_back("dense-" + std::to_string(d), o);
        }
    } else {
        throw ArgumentError("unknown sweep '" + study + "'");
    }
    return v;
}

std::vector<ModelRun> run_cnn_sweep(const Corpus &corpus,
                                    const std::vector<std::pair<std::string, nn::CnnOptions>> &variants,
                                    const RunOptions &opts) {
    std::vector<ModelRun> out;
    for (const auto &[name, o] : variants)
        out.push_back(train_and_test(corpus, nn::build_cnn(o, corpus.num_classes(), name), nn::InputKind::spectrogram, opts));
    return out;
}

std::vector<VolumeRow> run_volume_curve(const Corpus &corpus, const std::vector<std::size_t> &volumes,
                                        const RunOptions &opts) {
    corpus.require_splits();
    std::vector<std::size_t> per_room(corpus.num_classes(), 0);
    for (auto i : corpus.indices(data::Split::train)) ++per_room[static_cast<std::size_t>(corpus.classes[i])];
    const auto available = *std::min_element(per_room.begin(), per_room.end());
    for (auto v : volumes)
        if (v == 0 || v > available)
            throw PolicyError("volume " + std::to_string(v) + " outside [1, " + std::to_string(available) +
                              "] training samples per room");
    std::vector<VolumeRow> rows;
    const auto arch = nn::build_named_arch("CNN-C", corpus.num_classes());
    for (auto v : volumes) rows.push_back({v, train_and_test(corpus, arch, nn::InputKind::spectrogram, opts, v)});
    return rows;
}

Robustness run_robustness(const Corpus &corpus, const sim::Interferer &interferer, const RunOptions &opts) {
    interferer.validate();
    corpus.require_splits();
    const auto train_idx = corpus.indices(data::Split::train);
    const auto val_idx = corpus.indices(data::Split::val);
    const auto test_idx = corpus.indices(data::Split::test);
    const auto train_recs = pick(corpus, train_idx);
    const auto train_y = pick_labels(corpus, train_idx);
    const auto test_clean = pick(corpus, test_idx);
    const auto test_y = pick_labels(corpus, test_idx);
    std::vector<audio::AudioRecord> test_noisy;
    test_noisy.reserve(test_clean.size());
    for (std::size_t i = 0; i < test_clean.size(); ++i) {
        auto rng = sim::record_rng(opts.seed ^ 0x6d757369ULL, static_cast<std::uint64_t>(test_y[i]), test_idx[i]);
        test_noisy.push_back(sim::add_interferer(test_clean[i], interferer, rng));
    }

    Robustness r;
    {
        const auto kind = nn::InputKind::spectrogram;
        auto cfg = opts.train;
        cfg.seed = opts.seed;
        const auto tr = nn::make_dataset(train_recs, train_y, kind);
        const auto va = nn::make_dataset(pick(corpus, val_idx), pick_labels(corpus, val_idx), kind);
        const auto res = nn::train(nn::build_named_arch("CNN-C", corpus.num_classes()), tr, va, corpus.labels, kind, cfg);
        r.cnn_clean = nn::evaluate(res.model, nn::make_dataset(test_clean, test_y, kind)).accuracy;
        r.cnn_interfered = nn::evaluate(res.model, nn::make_dataset(test_noisy, test_y, kind)).accuracy;
        note(opts, "CNN-C narrowband: clean " + std::to_string(r.cnn_clean) + ", interfered " +
                       std::to_string(r.cnn_interfered));
    }
    {
        baseline::MfccSvmClassifier svm(baseline::MfccConfig::broadband());
        svm.fit(train_recs, train_y, corpus.label_names());
        r.svm_broad_clean = svm.accuracy(test_clean, test_y);
        r.svm_broad_interfered = svm.accuracy(test_noisy, test_y);
        note(opts, "MFCC-SVM broadband: clean " + std::to_string(r.svm_broad_clean) + ", interfered " +
                       std::to_string(r.svm_broad_interfered));
    }
    {
        baseline::MfccSvmClassifier svm(baseline::MfccConfig::narrowband());
        svm.fit(train_recs, train_y, corpus.label_names());
        r.svm_narrow_clean = svm.accuracy(test_clean, test_y);
        r.svm_narrow_interfered = svm.accuracy(test_noisy, test_y);
        note(opts, "MFCC-SVM narrowband: clean " + std::to_string(r.svm_narrow_clean) + ", interfered " +
                       std::to_string(r.svm_narrow_interfered));
    }
    return r;
}

std::vector<std::string> experiment_names() {
    return {"design-matrix", "arch-sweep", "volume", "robustness", "pooling", "filters", "filter-size", "dense-depth"};
}

Report run_experiment(const std::string &name, const Corpus &corpus, const RunOptions &opts) {
    Report rep;
    rep.name = name;
    std::ostringstream csv;
    json rows = json::array();
    std::string archs;

    if (name == "design-matrix") {
        const auto m = run_design_matrix(corpus, opts);
        archs = "CNN-C,DNN-spec,CNN-psd,DNN-psd";
        csv << kRunHeader << '\n';
        for (const auto *r : {&m.spec_cnn, &m.spec_dnn, &m.psd_cnn, &m.psd_dnn}) {
            csv << run_csv_row(*r) << '\n';
            rows.push_back(run_json(*r));
        }
    } else if (name == "arch-sweep") {
        std::vector<std::string> names{"CNN-A", "CNN-B", "CNN-C", "CNN-D", "CNN-E", "CNN-F", "CNN-G"};
        for (const auto &n : names) archs += (archs.empty() ? "" : ",") + n;
        csv << kRunHeader << ",params_k22\n";
        for (const auto &r : run_arch_sweep(corpus, names, opts)) {
            csv << run_csv_row(r.run) << ',' << r.params_k22 << '\n';
            auto j = run_json(r.run);
            j["params_k22"] = r.params_k22;
            rows.push_back(j);
        }
    } else if (name == "volume") {
        archs = "CNN-C";
        csv << "volume," << kRunHeader << '\n';
        for (const auto &r : run_volume_curve(corpus, {100, 250, 375, 437, 500}, opts)) {
            csv << r.volume << ',' << run_csv_row(r.run) << '\n';
            auto j = run_json(r.run);
            j["volume"] = r.volume;
            rows.push_back(j);
        }
    } else if (name == "robustness") {
        archs = "CNN-C,MFCC-SVM";
        const auto r = run_robustness(corpus, sim::Interferer{}, opts);
        csv << "method,clean_accuracy,interfered_accuracy\n";
        const std::vector<std::tuple<std::string, double, double>> cells{
            {"cnn-narrowband", r.cnn_clean, r.cnn_interfered},
            {"svm-broadband", r.svm_broad_clean, r.svm_broad_interfered},
            {"svm-narrowband", r.svm_narrow_clean, r.svm_narrow_interfered}};
        for (const auto &[m, c, i] : cells) {
            csv << m << ',' << c << ',' << i << '\n';
            rows.push_back({{"method", m}, {"clean_accuracy", c}, {"interfered_accuracy", i}});
        }
    } else if (name == "pooling" || name == "filters" || name == "filter-size" || name == "dense-depth") {
        const auto variants = sweep_variants(name);
        for (const auto &v : variants) archs += (archs.empty() ? "" : ",") + v.first;
        csv << kRunHeader << '\n';
        for (const auto &r : run_cnn_sweep(corpus, variants, opts)) {
            csv << run_csv_row(r) << '\n';
            rows.push_back(run_json(r));
        }
    } else {
        throw ArgumentError("unknown experiment '" + name + "'");
    }

    std::ostringstream head;
    head << "# experiment: " << name << '\n'
         << "# seed: " << opts.seed << '\n'
         << "# arch: " << archs << '\n'
         << "# corpus_hash: " << corpus.hash << '\n'
         << "# rooms: " << corpus.num_classes() << '\n'
         << "# records: " << corpus.size() << '\n'
         << "# max_steps: " << opts.train.max_steps << '\n';
    rep.csv = head.str() + csv.str();
    rep.summary_json = json{{"experiment", name},
                            {"seed", opts.seed},
                            {"arch", archs},
                            {"corpus_hash", corpus.hash},
                            {"rooms", corpus.num_classes()},
                            {"records", corpus.size()},
                            {"max_steps", opts.train.max_steps},
                            {"rows", rows}}
                           .dump(2);
    return rep;
}

void write_report(const Report &report, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    for (const auto &[ext, text] : {std::pair{".csv", &report.csv}, std::pair{".json", &report.summary_json}}) {
        const auto p = dir / (report.name + ext);
        std::ofstream out(p, std::ios::trunc);
        if (!out) throw IoError("cannot write " + p.string());
        out << *text;
        if (!out) throw IoError("short write to " + p.string());
    }
}

}  // namespace roomrec::experiments
