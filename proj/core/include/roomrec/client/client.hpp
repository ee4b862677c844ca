#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roomrec/audio/types.hpp"
#include "roomrec/error.hpp"

namespace roomrec::client {

enum class Mode { recognition, training };

/// Throws ArgumentError for anything but "recognition" / "training".
Mode mode_from_string(std::string_view s);
std::string_view to_string(Mode m);

/// Records one emit-record call yields: 1 for recognition, 500 for training.
std::size_t records_for(Mode m);

/// Where records come from: `device`, `file:PATH` or `sim:PROFILE`, where PROFILE is a room
/// profile JSON file or `default/<index>` for one of the built-in synthetic rooms.
struct CaptureSource {
    enum class Kind { device, file, simulator };
    Kind kind = Kind::simulator;
    std::string locator;

    /// Throws ArgumentError on an unknown scheme or empty locator.
    static CaptureSource parse(std::string_view spec);
};

/// Captures records_for(mode) records. Simulator output is deterministic per seed.
/// Throws CaptureError when the source cannot deliver.
std::vector<audio::AudioRecord> emit_record(Mode mode, const CaptureSource &source, std::uint64_t seed = 0);

/// A non-2xx reply from the service.
class ServerError : public Error {
  public:
    ServerError(int status, std::string message, std::string field)
        : Error("server returned " + std::to_string(status) + ": " + message), status_(status),
          message_(std::move(message)), field_(std::move(field)) {}

    [[nodiscard]] int status() const noexcept { return status_; }
    [[nodiscard]] const std::string &message() const noexcept { return message_; }
    [[nodiscard]] const std::string &field() const noexcept { return field_; }

  private:
    int status_;
    std::string message_;
    std::string field_;
};

struct Scored {
    std::string label;
    double score = 0;
};

struct RecognitionResult {
    std::string label;
    double confidence = 0;
    std::vector<Scored> topk;
    std::uint64_t model_version = 0;
    std::string raw;
};

struct SessionResult {
    std::string session_id;
    std::vector<Scored> candidates;
    std::string raw;
};

struct LabelResult {
    std::string task_id;
    std::string raw;
};

struct TaskStatus {
    std::string task_id;
    std::string state;
    std::optional<std::uint64_t> model_version;
    std::string message;
    std::string raw;

    [[nodiscard]] bool finished() const { return state == "done" || state == "failed"; }
};

struct ClientOptions {
    std::chrono::milliseconds timeout{30000};
    bool verify_tls = true;
    std::string ca_cert;  ///< optional CA bundle for https servers
};

/// Blocking client for the /api/v1 endpoints. Network failures raise TransportError,
/// error replies raise ServerError.
class ServiceClient {
  public:
    explicit ServiceClient(std::string server_url, ClientOptions opts = {});
    ~ServiceClient();
    ServiceClient(ServiceClient &&) noexcept;
    ServiceClient &operator=(ServiceClient &&) noexcept;

    RecognitionResult recognize(const audio::AudioRecord &rec);
    SessionResult upload_samples(std::span<const audio::AudioRecord> records);
    LabelResult upload_label(const std::string &session_id, const std::string &label);
    TaskStatus task(const std::string &task_id);
    /// Polls until the task is done or failed; throws TransportError after `limit`.
    TaskStatus watch(const std::string &task_id, std::chrono::milliseconds poll = std::chrono::milliseconds(500),
                     std::chrono::milliseconds limit = std::chrono::hours(2));
    std::string get_json(const std::string &path);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// ROOMREC_SERVER if set, otherwise http://127.0.0.1:8080.
std::string default_server();

}  // namespace roomrec::client
