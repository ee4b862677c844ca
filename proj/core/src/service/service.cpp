#include "roomrec/service/service.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <random>

#include "json.hpp"
#include "roomrec/audio/wav.hpp"
#include "roomrec/error.hpp"
#include "roomrec/nn/train.hpp"

namespace roomrec::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kTopK = 5;

double unix_now() {
    return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
}

json opt(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

Response ok(const json &j, int status = 200) { return {status, j.dump()}; }
Response fail(int status, const std::string &msg, const std::string &field = {}) {
    return {status, error_body(msg, field)};
}

std::string random_token() {
    static std::mutex mutex;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mutex);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(rng()));
    return buf;
}

std::string read_file(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path &p, const std::string &text) {
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << text;
        if (!out) throw IoError("short write to " + tmp);
    }
    fs::rename(tmp, p);
}

nn::InputKind input_for(const nn::CnnArch &arch) {
    return arch.input == nn::kPsdInput ? nn::InputKind::psd : nn::InputKind::spectrogram;
}

}  // namespace

std::string error_body(const std::string &message, const std::string &field) {
    return json{{"error", message}, {"field", field.empty() ? json(nullptr) : json(field)}}.dump();
}

std::string_view to_string(TaskState s) {
    switch (s) {
    case TaskState::queued: return "queued";
    case TaskState::running: return "running";
    case TaskState::done: return "done";
    case TaskState::failed: return "failed";
    }
    return "?";
}

std::string_view to_string(SessionState s) {
    switch (s) {
    case SessionState::awaiting_label: return "awaiting_label";
    case SessionState::labeled: return "labeled";
    case SessionState::merged: return "merged";
    }
    return "?";
}

std::string TrainTask::to_json() const {
    return json{{"task_id", task_id},
                {"state", std::string(service::to_string(state))},
                {"submitted_at", submitted_at},
                {"started_at", opt(started_at)},
                {"finished_at", opt(finished_at)},
                {"model_version", model_version ? json(*model_version) : json(nullptr)},
                {"message", message},
                {"metrics", metrics_json.empty() ? json(nullptr) : json::parse(metrics_json)}}
        .dump();
}

// ---------------------------------------------------------------------------------------------

TaskMonitor::TaskMonitor() : worker_([this] { run(); }) {}

TaskMonitor::~TaskMonitor() { shutdown(); }

std::string TaskMonitor::submit(Job job) {
    std::lock_guard lock(mutex_);
    if (stopping_) throw Error("task monitor is shutting down");
    char id[32];
    std::snprintf(id, sizeof id, "task-%06llu", static_cast<unsigned long long>(next_id_++));
    TrainTask t;
    t.task_id = id;
    t.submitted_at = unix_now();
    tasks_[id] = t;
    queue_.emplace_back(id, std::move(job));
    cv_.notify_all();
    return id;
}

std::optional<TrainTask> TaskMonitor::get(const std::string &task_id) const {
    std::lock_guard lock(mutex_);
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) return std::nullopt;
    return it->second;
}

std::vector<TrainTask> TaskMonitor::list() const {
    std::lock_guard lock(mutex_);
    std::vector<TrainTask> out;
    for (const auto &[id, t] : tasks_) out.push_back(t);
    return out;
}

void TaskMonitor::wait_idle() const {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return (queue_.empty() && !busy_) || stopping_; });
}

void TaskMonitor::shutdown() {
    {
        std::lock_guard lock(mutex_);
        if (stopping_ && !worker_.joinable()) return;
        stopping_ = true;
        for (auto &[id, job] : queue_) {
            auto &t = tasks_[id];
            t.state = TaskState::failed;
            t.message = "service shut down before the task started";
            t.finished_at = unix_now();
        }
        queue_.clear();
        cv_.notify_all();
    }
    if (worker_.joinable()) worker_.join();
}

void TaskMonitor::run() {
    for (;;) {
        std::pair<std::string, Job> item;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;
            item = std::move(queue_.front());
            queue_.pop_front();
            busy_ = true;
            auto &t = tasks_[item.first];
            t.state = TaskState::running;
            t.started_at = unix_now();
        }
        TaskOutcome out;
        bool failed = false;
        try {
            out = item.second(item.first);
        } catch (const std::exception &e) {
            failed = true;
            out.message = e.what();
        }
        std::lock_guard lock(mutex_);
        auto &t = tasks_[item.first];
        t.state = failed ? TaskState::failed : TaskState::done;
        t.finished_at = unix_now();
        t.model_version = out.model_version;
        t.message = out.message;
        t.metrics_json = out.metrics_json;
        busy_ = false;
        cv_.notify_all();
    }
}

// ---------------------------------------------------------------------------------------------

RoomService::RoomService(ServiceConfig cfg) : cfg_(std::move(cfg)), store_((cfg_.validate(), cfg_.data_dir / "store")) {
    const auto model_path = cfg_.data_dir / "model.rrm";
    if (fs::exists(model_path)) model_ = std::make_shared<const nn::ModelBundle>(nn::load_model(model_path));
    const auto metrics_path = cfg_.data_dir / "metrics.json";
    if (fs::exists(metrics_path)) metrics_json_ = read_file(metrics_path);
}

RoomService::~RoomService() { monitor_.shutdown(); }

std::shared_ptr<const nn::ModelBundle> RoomService::snapshot() const {
    std::lock_guard lock(model_mutex_);
    return model_;
}

void RoomService::install(std::shared_ptr<const nn::ModelBundle> model) {
    std::lock_guard lock(model_mutex_);
    model_ = std::move(model);
}

Response RoomService::recognize(std::span<const std::uint8_t> wav) {
    if (wav.size() > cfg_.max_body_bytes) return fail(413, "request body exceeds the size limit", "body");
    std::vector<audio::AudioRecord> recs;
    try {
        recs = audio::decode_wav(wav);
    } catch (const FormatError &e) {
        return fail(400, e.what(), e.field());
    }
    if (recs.size() != 1) return fail(400, "expected exactly one 4410-sample record", "data");
    const auto model = snapshot();
    if (!model) return fail(409, "no trained model is available yet");

    const auto feats = nn::extract_features(recs.front(), model->input);
    const auto top = nn::predict_topk(*model, feats, kTopK);
    json topk = json::array();
    for (const auto &p : top) topk.push_back({{"label", p.label}, {"confidence", p.probability}});
    return ok({{"label", top.front().label},
               {"confidence", top.front().probability},
               {"topk", topk},
               {"model_version", model->version}});
}

std::vector<Candidate> RoomService::score_candidates(const std::vector<audio::AudioRecord> &records) const {
    const auto model = snapshot();
    if (!model) return {};
    const std::size_t k = model->num_classes();
    const std::size_t dim = nn::feature_dim(model->input);
    std::vector<double> mean(k, 0.0);
    constexpr std::size_t chunk = 100;
    for (std::size_t off = 0; off < records.size(); off += chunk) {
        const std::size_t n = std::min(chunk, records.size() - off);
        std::vector<float> rows;
        rows.reserve(n * dim);
        for (std::size_t i = 0; i < n; ++i) {
            const auto f = nn::extract_features(records[off + i], model->input);
            rows.insert(rows.end(), f.begin(), f.end());
        }
        const auto z = model->logits(rows, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j) mean[j] += z[i * k + j];
    }
    for (auto &m : mean) m /= static_cast<double>(records.size());
    std::vector<std::size_t> idx(k);
    for (std::size_t j = 0; j < k; ++j) idx[j] = j;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });
    std::vector<Candidate> out;
    for (std::size_t r = 0; r < std::min(kTopK, k); ++r) out.push_back({model->labels[idx[r]].label_id, mean[idx[r]]});
    return out;
}

Response RoomService::upload_samples(std::span<const std::uint8_t> wav) {
    if (wav.size() > cfg_.max_body_bytes) return fail(413, "request body exceeds the size limit", "body");
    if (wav.empty()) return fail(422, "the batch holds no records", "data");
    std::vector<audio::AudioRecord> recs;
    try {
        recs = audio::decode_wav(wav);
    } catch (const FormatError &e) {
        return fail(400, e.what(), e.field());
    }
    if (recs.empty()) return fail(422, "the batch holds no records", "data");
    if (recs.size() > cfg_.max_batch_records)
        return fail(400, "a batch may hold at most " + std::to_string(cfg_.max_batch_records) + " records", "data");
    expire_sessions();

    Session s;
    s.session_id = random_token();
    s.created = std::chrono::steady_clock::now();
    s.candidates = score_candidates(recs);
    s.records = std::move(recs);
    json cands = json::array();
    for (const auto &c : s.candidates) cands.push_back({{"label", c.label}, {"score", c.score}});
    const json body{{"session_id", s.session_id}, {"candidates", cands}, {"num_records", s.records.size()}};
    {
        std::lock_guard lock(session_mutex_);
        sessions_[s.session_id] = std::move(s);
    }
    return ok(body, 201);
}

Response RoomService::submit_label(const std::string &json_body) {
    json j;
    try {
        j = json::parse(json_body);
    } catch (const json::exception &) {
        return fail(400, "body is not valid JSON", "body");
    }
    if (!j.is_object()) return fail(400, "body must be a JSON object", "body");
    if (!j.contains("session_id") || !j["session_id"].is_string()) return fail(400, "session_id is required", "session_id");
    if (!j.contains("label") || !j["label"].is_string()) return fail(400, "label is required", "label");
    const auto session_id = j["session_id"].get<std::string>();
    const auto label = j["label"].get<std::string>();
    try {
        data::validate_label(label);
    } catch (const ArgumentError &e) {
        return fail(400, e.what(), "label");
    }

    std::vector<audio::AudioRecord> records;
    {
        std::lock_guard lock(session_mutex_);
        auto it = sessions_.find(session_id);
        if (it == sessions_.end()) return fail(404, "unknown or expired session", "session_id");
        if (it->second.state != SessionState::awaiting_label)
            return fail(409, "session has already been labeled", "session_id");
        it->second.state = SessionState::labeled;
        it->second.label = label;
        records = std::move(it->second.records);
        it->second.records.clear();
    }

    std::vector<data::LabeledAudio> batch;
    batch.reserve(records.size());
    for (auto &r : records) batch.push_back({std::move(r), label});
    const bool new_room = store_.manifest().find(label) == nullptr;
    store_.ingest(batch, true);

    const std::vector<std::string> merged{session_id};
    const auto task_id = monitor_.submit([this, merged](const std::string &id) { return retrain(id, merged); });
    {
        std::lock_guard lock(session_mutex_);
        auto it = sessions_.find(session_id);
        if (it != sessions_.end()) it->second.task_id = task_id;
    }
    return ok({{"task_id", task_id}, {"session_id", session_id}, {"label", label}, {"new_room", new_room}}, 202);
}

std::string RoomService::enqueue_retrain() {
    return monitor_.submit([this](const std::string &id) { return retrain(id, {}); });
}

TaskOutcome RoomService::retrain(const std::string &task_id, const std::vector<std::string> &sessions) {
    auto mark_merged = [&] {
        std::lock_guard lock(session_mutex_);
        for (const auto &id : sessions) {
            auto it = sessions_.find(id);
            if (it != sessions_.end()) it->second.state = SessionState::merged;
        }
    };
    if (store_.manifest().num_classes() < 2) {
        mark_merged();
        return {std::nullopt, "skipped: training needs at least two rooms", ""};
    }
    const auto manifest =
        store_.apply_split(data::SplitPolicy::fractions(cfg_.val_fraction, cfg_.test_fraction), cfg_.split_seed);
    const auto labels = manifest.labels();
    const auto arch = nn::build_named_arch(cfg_.arch, labels.size());
    const auto kind = input_for(arch);

    nn::Dataset train_set, val_set, test_set;
    for (const auto &s : store_.load(std::nullopt)) {
        const auto f = nn::extract_features(s.record, kind);
        auto &dst = s.split == data::Split::train ? train_set : s.split == data::Split::val ? val_set : test_set;
        dst.append(f, s.class_index);
    }
    train_set.dim = val_set.dim = test_set.dim = nn::feature_dim(kind);

    nn::TrainConfig tc;
    tc.max_steps = cfg_.max_steps;
    tc.eval_every = cfg_.eval_every;
    tc.patience = cfg_.patience;
    tc.seed = cfg_.train_seed;
    auto res = nn::train(arch, train_set, val_set, labels, kind, tc);

    const auto current = snapshot();
    res.model.version = (current ? current->version : 0) + 1;
    const auto ev = nn::evaluate(res.model, test_set);
    json names = json::array();
    for (const auto &l : labels) names.push_back(l.label_id);
    json counts = json::array();
    for (const auto &row : ev.confusion) {
        std::size_t n = 0;
        for (auto c : row) n += c;
        counts.push_back(n);
    }
    const json metrics{{"model_version", res.model.version},
                       {"task_id", task_id},
                       {"arch", arch.name},
                       {"accuracy", ev.accuracy},
                       {"loss", ev.loss},
                       {"labels", names},
                       {"confusion", ev.confusion},
                       {"test_counts", counts},
                       {"train_samples", train_set.size()},
                       {"steps", res.steps},
                       {"best_step", res.best_step}};
    const std::string metrics_text = metrics.dump();

    nn::save_model(res.model, cfg_.data_dir / "model.rrm");
    write_file_atomic(cfg_.data_dir / "metrics.json", metrics_text);
    const auto version = res.model.version;
    install(std::make_shared<const nn::ModelBundle>(std::move(res.model)));
    {
        std::lock_guard lock(metrics_mutex_);
        metrics_json_ = metrics_text;
    }
    mark_merged();
    return {version, "trained", metrics_text};
}

Response RoomService::get_task(const std::string &task_id) const {
    const auto t = monitor_.get(task_id);
    if (!t) return fail(404, "unknown task", "task_id");
    return {200, t->to_json()};
}

Response RoomService::list_tasks() const {
    json arr = json::array();
    for (const auto &t : monitor_.list()) arr.push_back(json::parse(t.to_json()));
    return ok({{"tasks", arr}});
}

Response RoomService::get_session(const std::string &session_id) {
    expire_sessions();
    std::lock_guard lock(session_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return fail(404, "unknown or expired session", "session_id");
    const auto &s = it->second;
    json cands = json::array();
    for (const auto &c : s.candidates) cands.push_back({{"label", c.label}, {"score", c.score}});
    return ok({{"session_id", s.session_id},
               {"state", std::string(to_string(s.state))},
               {"candidates", cands},
               {"label", s.label.empty() ? json(nullptr) : json(s.label)},
               {"task_id", s.task_id.empty() ? json(nullptr) : json(s.task_id)}});
}

Response RoomService::rooms() const {
    const auto m = store_.manifest();
    json arr = json::array();
    for (const auto &r : m.rooms)
        arr.push_back({{"label", r.label.label_id}, {"class_index", r.label.class_index}, {"samples", r.samples.size()}});
    const auto model = snapshot();
    return ok({{"rooms", arr},
               {"manifest_version", m.version},
               {"model_version", model ? json(model->version) : json(nullptr)},
               {"model_classes", model ? json(model->num_classes()) : json(nullptr)}});
}

Response RoomService::metrics() const {
    std::lock_guard lock(metrics_mutex_);
    if (metrics_json_.empty()) return fail(404, "no evaluation has completed yet");
    return {200, metrics_json_};
}

std::size_t RoomService::expire_sessions() {
    const auto now = std::chrono::steady_clock::now();
    const auto ttl = std::chrono::duration<double>(cfg_.session_ttl_s);
    std::lock_guard lock(session_mutex_);
    return std::erase_if(sessions_, [&](const auto &kv) {
        return now - kv.second.created > ttl;
    });
}

}  // namespace roomrec::service
