#pragma once
// In-process service on an ephemeral port plus small helpers shared by service/client tests.

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <thread>

#include "roomrec/audio/wav.hpp"
#include "roomrec/service/http_server.hpp"
#include "roomrec/sim/echo_sim.hpp"

namespace testsupport {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("roomrec-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
                std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;
};

/// Small, fast training settings for tests that exercise the retrain path.
inline roomrec::service::ServiceConfig quick_config(const std::filesystem::path &dir) {
    roomrec::service::ServiceConfig cfg;
    cfg.port = 0;
    cfg.data_dir = dir;
    cfg.max_steps = 200;
    cfg.eval_every = 50;
    cfg.patience = 4;
    cfg.threads = 4;
    cfg.request_log = false;
    return cfg;
}

struct Harness {
    std::unique_ptr<roomrec::service::RoomService> service;
    std::unique_ptr<roomrec::service::HttpServer> server;
    int port = 0;

    explicit Harness(const roomrec::service::ServiceConfig &cfg)
        : service(std::make_unique<roomrec::service::RoomService>(cfg)),
          server(std::make_unique<roomrec::service::HttpServer>(*service)) {
        port = server->start();
    }
    ~Harness() {
        server->stop();
        server.reset();
        service.reset();
    }
    [[nodiscard]] std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

/// `n` simulated records of built-in room `room` (index into default_profiles).
inline std::vector<roomrec::audio::AudioRecord> room_records(std::size_t room, std::size_t n, std::uint64_t seed) {
    const auto profile = roomrec::sim::default_profiles(room + 1)[room];
    std::vector<roomrec::audio::AudioRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = roomrec::sim::record_rng(seed, room, i);
        out.push_back(roomrec::sim::synth_record(profile, roomrec::sim::CaptureContext{}, rng));
    }
    return out;
}

inline std::string wav_body(const std::vector<roomrec::audio::AudioRecord> &recs) {
    const auto b = roomrec::audio::encode_wav(recs);
    return std::string(b.begin(), b.end());
}

}  // namespace testsupport
