// experiments: reproduce the study designs on synthetic or stored corpora.
#include <iostream>

#include "CLI11.hpp"
#include "roomrec/error.hpp"
#include "roomrec/experiments/experiments.hpp"

using namespace roomrec;

int main(int argc, char **argv) {
    CLI::App app{"Room recognition experiment harness"};
    app.require_subcommand(1);

    std::string name, corpus_arg = "synth", out = "results";
    std::uint64_t seed = 1;
    std::size_t rooms = 10, per_room = 1000;
    long max_steps = -1;
    bool quiet = false;
    auto *run = app.add_subcommand("run", "run one experiment and write <name>.csv / <name>.json");
    run->add_option("name", name, "experiment")->required()->check(CLI::IsMember(experiments::experiment_names()));
    run->add_option("--corpus", corpus_arg, "dataset store directory, or 'synth' for an in-memory corpus");
    run->add_option("--seed", seed, "training and subsampling seed");
    run->add_option("--out", out, "output directory");
    run->add_option("--rooms", rooms, "rooms for --corpus synth");
    run->add_option("--per-room", per_room, "records per room for --corpus synth");
    run->add_option("--max-steps", max_steps, "cap on SGD steps per model");
    run->add_flag("-q,--quiet", quiet, "no progress lines");

    std::string store;
    std::uint64_t synth_seed = 1;
    auto *synth = app.add_subcommand("synth", "write a simulated, split dataset store");
    synth->add_option("--out", store, "store directory")->required();
    synth->add_option("--rooms", rooms, "number of rooms");
    synth->add_option("--per-room", per_room, "records per room");
    synth->add_option("--seed", synth_seed, "simulation seed");

    auto *list = app.add_subcommand("list", "print experiment names");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            for (const auto &n : experiments::experiment_names()) std::cout << n << '\n';
            return 0;
        }
        if (*synth) {
            experiments::SynthOptions so;
            so.rooms = rooms;
            so.per_room = per_room;
            so.seed = synth_seed;
            const auto m = experiments::write_synth_store(store, so);
            std::cout << "wrote " << m.num_samples() << " records for " << rooms << " rooms to " << store << '\n';
            return 0;
        }
        experiments::Corpus corpus;
        if (corpus_arg == "synth") {
            experiments::SynthOptions so;
            so.rooms = rooms;
            so.per_room = per_room;
            corpus = experiments::synth_corpus(so);
        } else {
            corpus = experiments::load_corpus(corpus_arg);
        }
        experiments::RunOptions opts;
        opts.seed = seed;
        if (max_steps > 0) opts.train.max_steps = max_steps;
        if (!quiet) opts.log = [](const std::string &m) { std::clog << m << std::endl; };
        const auto rep = experiments::run_experiment(name, corpus, opts);
        experiments::write_report(rep, out);
        std::cout << rep.csv;
    } catch (const roomrec::ArgumentError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const roomrec::PolicyError &e) {
        std::cerr << "policy error: " << e.what() << '\n';
        return 3;
    } catch (const roomrec::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
