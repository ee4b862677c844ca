#include "roomrec/client/client.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "roomrec/audio/wav.hpp"
#include "roomrec/sim/echo_sim.hpp"

namespace roomrec::client {

using nlohmann::json;

Mode mode_from_string(std::string_view s) {
    if (s == "recognition") return Mode::recognition;
    if (s == "training") return Mode::training;
    throw ArgumentError("mode must be 'recognition' or 'training', got '" + std::string(s) + "'");
}

std::string_view to_string(Mode m) { return m == Mode::training ? "training" : "recognition"; }

std::size_t records_for(Mode m) { return m == Mode::training ? 500 : 1; }

CaptureSource CaptureSource::parse(std::string_view spec) {
    CaptureSource s;
    if (spec == "device") {
        s.kind = Kind::device;
        return s;
    }
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) throw ArgumentError("source must be device, file:PATH or sim:PROFILE");
    const auto scheme = spec.substr(0, colon);
    s.locator = std::string(spec.substr(colon + 1));
    if (scheme == "file")
        s.kind = Kind::file;
    else if (scheme == "sim")
        s.kind = Kind::simulator;
    else
        throw ArgumentError("unknown source scheme '" + std::string(scheme) + "'");
    if (s.locator.empty()) throw ArgumentError("source '" + std::string(spec) + "' has an empty locator");
    return s;
}

namespace {

sim::RoomProfile resolve_profile(const std::string &locator) {
    constexpr std::string_view prefix = "default/";
    if (locator.rfind(prefix, 0) == 0) {
        const auto idx_text = locator.substr(prefix.size());
        char *end = nullptr;
        const unsigned long idx = std::strtoul(idx_text.c_str(), &end, 10);
        if (idx_text.empty() || *end != '\0' || idx > 999)
            throw CaptureError("simulator profile index '" + idx_text + "' is not an integer in [0, 999]");
        return sim::default_profiles(idx + 1)[idx];
    }
    std::ifstream in(locator);
    if (!in) throw CaptureError("cannot open simulator profile " + locator);
    try {
        return sim::profile_from_json(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
    } catch (const Error &e) {
        throw CaptureError("bad simulator profile " + locator + ": " + e.what());
    }
}

}  // namespace

std::vector<audio::AudioRecord> emit_record(Mode mode, const CaptureSource &source, std::uint64_t seed) {
    const std::size_t n = records_for(mode);
    switch (source.kind) {
    case CaptureSource::Kind::device:
        throw CaptureError("no audio device backend is available in this build; use file: or sim: sources");
    case CaptureSource::Kind::file: {
        std::vector<audio::AudioRecord> recs;
        try {
            recs = audio::wav_read(source.locator);
        } catch (const Error &e) {
            throw CaptureError(e.what());
        }
        if (recs.size() < n)
            throw CaptureError(source.locator + " holds " + std::to_string(recs.size()) + " records, " +
                               std::string(to_string(mode)) + " mode needs " + std::to_string(n));
        recs.resize(n);
        return recs;
    }
    case CaptureSource::Kind::simulator: {
        const auto profile = resolve_profile(source.locator);
        const sim::CaptureContext ctx;
        std::vector<audio::AudioRecord> recs;
        recs.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto rng = sim::record_rng(seed ^ profile.seed, 0, i);
            recs.push_back(sim::synth_record(profile, ctx, rng));
        }
        return recs;
    }
    }
    throw CaptureError("unknown capture source");
}

std::string default_server() {
    if (const char *v = std::getenv("ROOMREC_SERVER"); v && *v) return v;
    return "http://127.0.0.1:8080";
}

struct ServiceClient::Impl {
    httplib::Client cli;
    std::string url;

    Impl(const std::string &u, const ClientOptions &o) : cli(u), url(u) {
        if (!cli.is_valid()) throw ArgumentError("invalid server URL '" + u + "'");
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(o.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(o.timeout - secs);
        cli.set_connection_timeout(secs.count(), usecs.count());
        cli.set_read_timeout(secs.count(), usecs.count());
        cli.set_write_timeout(secs.count(), usecs.count());
        cli.enable_server_certificate_verification(o.verify_tls);
        if (!o.ca_cert.empty()) cli.set_ca_cert_path(o.ca_cert);
    }

    json check(const httplib::Result &r) {
        if (!r)
            throw TransportError("cannot reach " + url + ": " + httplib::to_string(r.error()) +
                                 " (check the server address and retry)");
        json body;
        try {
            body = json::parse(r->body);
        } catch (const json::exception &) {
            if (r->status >= 200 && r->status < 300) throw TransportError("server sent a non-JSON reply");
        }
        if (r->status < 200 || r->status >= 300) {
            std::string msg = httplib::status_message(r->status);
            std::string field;
            if (body.is_object()) {
                if (body.contains("error") && body["error"].is_string()) msg = body["error"];
                if (body.contains("field") && body["field"].is_string()) field = body["field"];
            }
            throw ServerError(r->status, msg, field);
        }
        return body;
    }
};

ServiceClient::ServiceClient(std::string server_url, ClientOptions opts)
    : impl_(std::make_unique<Impl>(server_url, opts)) {}
ServiceClient::~ServiceClient() = default;
ServiceClient::ServiceClient(ServiceClient &&) noexcept = default;
ServiceClient &ServiceClient::operator=(ServiceClient &&) noexcept = default;

namespace {

std::vector<Scored> scored_list(const json &arr, const char *key) {
    std::vector<Scored> out;
    for (const auto &e : arr) out.push_back({e.at("label").get<std::string>(), e.at(key).get<double>()});
    return out;
}

std::string wav_body(std::span<const audio::AudioRecord> recs) {
    const auto bytes = audio::encode_wav(recs);
    return {bytes.begin(), bytes.end()};
}

template <typename F>
auto parse_reply(F &&f) {
    try {
        return f();
    } catch (const json::exception &e) {
        throw TransportError(std::string("unexpected reply shape: ") + e.what());
    }
}

}  // namespace

RecognitionResult ServiceClient::recognize(const audio::AudioRecord &rec) {
    const auto body = impl_->check(impl_->cli.Post("/api/v1/recognize", wav_body(std::span(&rec, 1)), "audio/wav"));
    return parse_reply([&] {
        RecognitionResult r;
        r.label = body.at("label").get<std::string>();
        r.confidence = body.at("confidence").get<double>();
        r.topk = scored_list(body.at("topk"), "confidence");
        r.model_version = body.at("model_version").get<std::uint64_t>();
        r.raw = body.dump();
        return r;
    });
}

SessionResult ServiceClient::upload_samples(std::span<const audio::AudioRecord> records) {
    const auto body = impl_->check(impl_->cli.Post("/api/v1/samples", wav_body(records), "audio/wav"));
    return parse_reply([&] {
        SessionResult r;
        r.session_id = body.at("session_id").get<std::string>();
        r.candidates = scored_list(body.at("candidates"), "score");
        r.raw = body.dump();
        return r;
    });
}

LabelResult ServiceClient::upload_label(const std::string &session_id, const std::string &label) {
    const json req{{"session_id", session_id}, {"label", label}};
    const auto body = impl_->check(impl_->cli.Post("/api/v1/labels", req.dump(), "application/json"));
    return parse_reply([&] { return LabelResult{body.at("task_id").get<std::string>(), body.dump()}; });
}

TaskStatus ServiceClient::task(const std::string &task_id) {
    const auto body = impl_->check(impl_->cli.Get("/api/v1/tasks/" + task_id));
    return parse_reply([&] {
        TaskStatus t;
        t.task_id = body.at("task_id").get<std::string>();
        t.state = body.at("state").get<std::string>();
        if (!body.at("model_version").is_null()) t.model_version = body["model_version"].get<std::uint64_t>();
        t.message = body.value("message", "");
        t.raw = body.dump();
        return t;
    });
}

TaskStatus ServiceClient::watch(const std::string &task_id, std::chrono::milliseconds poll,
                                std::chrono::milliseconds limit) {
    const auto deadline = std::chrono::steady_clock::now() + limit;
    for (;;) {
        auto t = task(task_id);
        if (t.finished()) return t;
        if (std::chrono::steady_clock::now() > deadline)
            throw TransportError("gave up waiting for task " + task_id + " (still " + t.state + ")");
        std::this_thread::sleep_for(poll);
    }
}

std::string ServiceClient::get_json(const std::string &path) { return impl_->check(impl_->cli.Get(path)).dump(); }

}  // namespace roomrec::client
