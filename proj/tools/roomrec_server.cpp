// roomrec-server: HTTP(S) front end for the room recognition service.
#include <csignal>
#include <chrono>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "roomrec/error.hpp"
#include "roomrec/experiments/corpus.hpp"
#include "roomrec/service/http_server.hpp"

using namespace roomrec;

namespace {
volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }
}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Room recognition service"};
    std::optional<std::string> config_path, data_dir, host;
    std::optional<int> port;
    std::size_t bootstrap_rooms = 0, bootstrap_per_room = 200;
    bool wait_bootstrap = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--host", host, "bind address");
    app.add_option("--port", port, "bind port (0 = ephemeral)");
    app.add_option("--data-dir", data_dir, "store, model and metrics directory");
    app.add_option("--bootstrap-rooms", bootstrap_rooms,
                   "seed an empty store with this many simulated rooms and train a first model");
    app.add_option("--bootstrap-per-room", bootstrap_per_room, "records per simulated room");
    app.add_flag("--wait-bootstrap", wait_bootstrap, "block until the bootstrap model is trained");
    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = service::load_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt);
        if (host) cfg.host = *host;
        if (port) cfg.port = *port;
        if (data_dir) cfg.data_dir = *data_dir;
        cfg.validate();

        if (bootstrap_rooms > 0 && !std::filesystem::exists(cfg.data_dir / "store" / "manifest.json")) {
            experiments::SynthOptions so;
            so.rooms = bootstrap_rooms;
            so.per_room = bootstrap_per_room;
            experiments::write_synth_store(cfg.data_dir / "store", so);
            std::clog << "bootstrapped " << bootstrap_rooms << " simulated rooms into " << (cfg.data_dir / "store")
                      << '\n';
        } else {
            bootstrap_rooms = 0;
        }

        service::RoomService svc(cfg);
        if (bootstrap_rooms > 0) {
            const auto id = svc.enqueue_retrain();
            std::clog << "bootstrap retrain queued as " << id << '\n';
            if (wait_bootstrap) svc.monitor().wait_idle();
        }
        service::HttpServer server(svc);
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        const int bound = server.start();
        std::cout << "listening on " << (server.tls() ? "https" : "http") << "://" << cfg.host << ':' << bound
                  << std::endl;
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
        std::clog << "shutting down\n";
        server.stop();
    } catch (const roomrec::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const roomrec::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
