#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "roomrec/audio/types.hpp"
#include "roomrec/data/dataset_store.hpp"
#include "roomrec/nn/model_io.hpp"
#include "roomrec/service/config.hpp"

namespace roomrec::service {

enum class TaskState { queued, running, done, failed };
std::string_view to_string(TaskState s);

struct TrainTask {
    std::string task_id;
    TaskState state = TaskState::queued;
    double submitted_at = 0;  ///< unix seconds
    std::optional<double> started_at;
    std::optional<double> finished_at;
    std::optional<std::uint64_t> model_version;
    std::string message;
    std::string metrics_json;  ///< empty until a model was evaluated

    std::string to_json() const;
};

/// What a finished job reports back to the monitor.
struct TaskOutcome {
    std::optional<std::uint64_t> model_version;
    std::string message;
    std::string metrics_json;
};

/// Runs submitted jobs one at a time, FIFO, on a single worker thread.
class TaskMonitor {
  public:
    using Job = std::function<TaskOutcome(const std::string &task_id)>;

    TaskMonitor();
    ~TaskMonitor();
    TaskMonitor(const TaskMonitor &) = delete;
    TaskMonitor &operator=(const TaskMonitor &) = delete;

    std::string submit(Job job);
    [[nodiscard]] std::optional<TrainTask> get(const std::string &task_id) const;
    [[nodiscard]] std::vector<TrainTask> list() const;
    /// Blocks until no task is queued or running.
    void wait_idle() const;
    /// Stops after the running task; queued tasks end as failed.
    void shutdown();

  private:
    void run();

    mutable std::mutex mutex_;
    mutable std::condition_variable cv_;
    std::map<std::string, TrainTask> tasks_;
    std::deque<std::pair<std::string, Job>> queue_;
    std::uint64_t next_id_ = 1;
    bool busy_ = false;
    bool stopping_ = false;
    std::thread worker_;
};

enum class SessionState { awaiting_label, labeled, merged };
std::string_view to_string(SessionState s);

struct Candidate {
    std::string label;
    double score = 0;  ///< mean output-layer score over the batch
};

struct Session {
    std::string session_id;
    SessionState state = SessionState::awaiting_label;
    std::vector<audio::AudioRecord> records;
    std::vector<Candidate> candidates;
    std::chrono::steady_clock::time_point created;
    std::string label;
    std::string task_id;
};

/// Transport-independent response.
struct Response {
    int status = 200;
    std::string body;
};

/// The recognition service. Handlers are safe to call concurrently; the served model is an
/// immutable snapshot swapped atomically by the training worker.
class RoomService {
  public:
    explicit RoomService(ServiceConfig cfg);
    ~RoomService();

    Response recognize(std::span<const std::uint8_t> wav);
    Response upload_samples(std::span<const std::uint8_t> wav);
    Response submit_label(const std::string &json_body);
    Response get_task(const std::string &task_id) const;
    Response list_tasks() const;
    Response get_session(const std::string &session_id);
    Response rooms() const;
    Response metrics() const;

    [[nodiscard]] std::shared_ptr<const nn::ModelBundle> snapshot() const;
    [[nodiscard]] const ServiceConfig &config() const noexcept { return cfg_; }
    data::DatasetStore &store() noexcept { return store_; }
    TaskMonitor &monitor() noexcept { return monitor_; }

    /// Queues a from-scratch retrain over the whole store.
    std::string enqueue_retrain();
    /// Drops sessions older than the configured TTL; returns how many were removed.
    std::size_t expire_sessions();

  private:
    TaskOutcome retrain(const std::string &task_id, const std::vector<std::string> &sessions);
    void install(std::shared_ptr<const nn::ModelBundle> model);
    std::vector<Candidate> score_candidates(const std::vector<audio::AudioRecord> &records) const;

    ServiceConfig cfg_;
    data::DatasetStore store_;
    mutable std::mutex model_mutex_;
    std::shared_ptr<const nn::ModelBundle> model_;
    mutable std::mutex metrics_mutex_;
    std::string metrics_json_;
    std::mutex session_mutex_;
    std::map<std::string, Session> sessions_;
    TaskMonitor monitor_;
};

/// {"error": message, "field": field-or-null}
std::string error_body(const std::string &message, const std::string &field = {});

}  // namespace roomrec::service
