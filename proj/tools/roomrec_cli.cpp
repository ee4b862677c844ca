// roomrec: capture, upload and label from the command line.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "roomrec/audio/wav.hpp"
#include "roomrec/client/client.hpp"

using namespace roomrec;

namespace {

enum Exit { kOk = 0, kUsage = 2, kCapture = 3, kTransport = 4, kServer = 5 };

void print_scored(const char *title, const std::vector<client::Scored> &xs) {
    std::cout << title << ":\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
        std::printf("  %zu. %-24s %.4f\n", i + 1, xs[i].label.c_str(), xs[i].score);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Room recognition client: capture echo records, upload them, label sessions"};
    app.require_subcommand(1);

    std::string server = client::default_server();
    bool json_out = false;
    bool insecure = false;
    std::string ca_cert;
    app.add_option("--server", server, "service base URL (env ROOMREC_SERVER)");
    app.add_flag("--json", json_out, "print raw JSON replies");
    app.add_flag("--insecure", insecure, "skip TLS certificate verification");
    app.add_option("--ca-cert", ca_cert, "CA bundle for https servers");

    std::string mode_s = "recognition", source_s = "sim:default/0", out;
    std::uint64_t seed = 0;
    auto *emit = app.add_subcommand("emit-record", "capture records to a WAV file");
    emit->add_option("--mode", mode_s, "recognition | training")->check(CLI::IsMember({"recognition", "training"}));
    emit->add_option("--source", source_s, "device | file:PATH | sim:PROFILE");
    emit->add_option("--seed", seed, "simulator seed");
    emit->add_option("--out", out, "output WAV path")->required();

    std::string up_mode = "recognition", in_path, up_source;
    std::uint64_t up_seed = 0;
    auto *upload = app.add_subcommand("upload", "send records for recognition or as a training session");
    upload->add_option("--mode", up_mode, "recognition | training")->check(CLI::IsMember({"recognition", "training"}));
    auto *in_opt = upload->add_option("--in", in_path, "WAV file written by emit-record");
    auto *src_opt = upload->add_option("--source", up_source, "capture directly from this source");
    upload->add_option("--seed", up_seed, "simulator seed for --source");
    in_opt->excludes(src_opt);

    std::string session, label;
    bool watch = false;
    auto *lab = app.add_subcommand("label", "label an uploaded session and trigger retraining");
    lab->add_option("--session", session, "session id from upload")->required();
    lab->add_option("--label", label, "room name")->required();
    lab->add_flag("--watch", watch, "poll the retrain task until it finishes");

    std::string task_id;
    auto *task = app.add_subcommand("task", "show a retrain task");
    task->add_option("id", task_id)->required();
    task->add_flag("--watch", watch, "poll until finished");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    client::ClientOptions copts;
    copts.verify_tls = !insecure;
    copts.ca_cert = ca_cert;

    try {
        if (*emit) {
            const auto recs = client::emit_record(client::mode_from_string(mode_s), client::CaptureSource::parse(source_s), seed);
            audio::wav_write(recs, out);
            std::cerr << "wrote " << recs.size() << " records to " << out << '\n';
            return kOk;
        }
        client::ServiceClient cli(server, copts);
        if (*upload) {
            const auto mode = client::mode_from_string(up_mode);
            if (in_path.empty() && up_source.empty()) {
                std::cerr << "upload: one of --in or --source is required\n";
                return kUsage;
            }
            std::vector<audio::AudioRecord> recs;
            if (!in_path.empty()) {
                try {
                    recs = audio::wav_read(in_path);
                } catch (const Error &e) {
                    throw CaptureError(e.what());
                }
            } else {
                recs = client::emit_record(mode, client::CaptureSource::parse(up_source), up_seed);
            }
            if (recs.empty()) throw CaptureError("no records to upload");
            if (mode == client::Mode::recognition) {
                const auto r = cli.recognize(recs.front());
                if (json_out) {
                    std::cout << r.raw << '\n';
                } else {
                    std::printf("room: %s (confidence %.4f, model v%llu)\n", r.label.c_str(), r.confidence,
                                static_cast<unsigned long long>(r.model_version));
                    print_scored("top candidates", r.topk);
                }
            } else {
                const auto s = cli.upload_samples(recs);
                if (json_out) {
                    std::cout << s.raw << '\n';
                } else {
                    std::cout << "session: " << s.session_id << '\n';
                    print_scored("candidates", s.candidates);
                }
            }
            return kOk;
        }
        if (*lab || *task) {
            std::string id = task_id;
            if (*lab) {
                const auto r = cli.upload_label(session, label);
                id = r.task_id;
                if (json_out) std::cout << r.raw << '\n';
                else std::cout << "task: " << id << '\n';
            }
            client::TaskStatus st = watch ? cli.watch(id) : cli.task(id);
            if (json_out) std::cout << st.raw << '\n';
            else std::cout << st.task_id << ": " << st.state << (st.message.empty() ? "" : " (" + st.message + ")") << '\n';
            if (watch && st.state == "failed") return kServer;
            return kOk;
        }
    } catch (const CaptureError &e) {
        std::cerr << "capture error: " << e.what() << '\n';
        return kCapture;
    } catch (const TransportError &e) {
        std::cerr << "transport error: " << e.what() << '\n';
        return kTransport;
    } catch (const client::ServerError &e) {
        std::cerr << "server error " << e.status() << ": " << e.message();
        if (!e.field().empty()) std::cerr << " (field " << e.field() << ")";
        std::cerr << '\n';
        return kServer;
    } catch (const ArgumentError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCapture;
    }
    return kUsage;
}
