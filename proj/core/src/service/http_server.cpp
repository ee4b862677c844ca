#include "roomrec/service/http_server.hpp"

#include <chrono>
#include <iostream>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "roomrec/error.hpp"

namespace roomrec::service {

namespace {

thread_local std::chrono::steady_clock::time_point request_start;

std::span<const std::uint8_t> bytes_of(const std::string &s) {
    return {reinterpret_cast<const std::uint8_t *>(s.data()), s.size()};
}

void reply(httplib::Response &res, const Response &r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
}

}  // namespace

struct HttpServer::Impl {
    RoomService &svc;
    std::unique_ptr<httplib::Server> server;
    std::thread thread;
    int port = -1;
    std::mutex log_mutex;

    explicit Impl(RoomService &s) : svc(s) {
        const auto &cfg = svc.config();
        if (cfg.tls()) {
            auto ssl = std::make_unique<httplib::SSLServer>(cfg.tls_cert.c_str(), cfg.tls_key.c_str());
            if (!ssl->is_valid()) throw ConfigError("tls: cannot load certificate or key");
            server = std::move(ssl);
        } else {
            server = std::make_unique<httplib::Server>();
        }
        routes();
    }

    void routes() {
        auto &srv = *server;
        const auto &cfg = svc.config();
        const int threads = cfg.threads;
        srv.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
        srv.set_payload_max_length(cfg.max_body_bytes);
        srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        srv.set_pre_routing_handler([](const httplib::Request &, httplib::Response &) {
            request_start = std::chrono::steady_clock::now();
            return httplib::Server::HandlerResponse::Unhandled;
        });
        srv.set_error_handler([](const httplib::Request &, httplib::Response &res) {
            if (!res.body.empty()) return;
            std::string msg = res.status == 413 ? "request body exceeds the size limit" : httplib::status_message(res.status);
            res.set_content(error_body(msg, res.status == 413 ? "body" : ""), "application/json");
        });
        srv.set_exception_handler([](const httplib::Request &, httplib::Response &res, std::exception_ptr ep) {
            std::string msg = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception &e) {
                msg = e.what();
            } catch (...) {
            }
            res.status = 500;
            res.set_content(error_body(msg), "application/json");
        });
        if (cfg.request_log) {
            srv.set_logger([this](const httplib::Request &req, const httplib::Response &res) {
                const double ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - request_start).count();
                const auto line = nlohmann::json{{"ts", std::chrono::duration<double>(
                                                            std::chrono::system_clock::now().time_since_epoch())
                                                            .count()},
                                                 {"method", req.method},
                                                 {"path", req.path},
                                                 {"status", res.status},
                                                 {"ms", ms},
                                                 {"bytes_in", req.body.size()},
                                                 {"bytes_out", res.body.size()}}
                                      .dump();
                std::lock_guard lock(log_mutex);
                std::clog << line << '\n';
            });
        }

        srv.Post("/api/v1/recognize", [this](const httplib::Request &req, httplib::Response &res) {
            reply(res, svc.recognize(bytes_of(req.body)));
        });
        srv.Post("/api/v1/samples", [this](const httplib::Request &req, httplib::Response &res) {
            reply(res, svc.upload_samples(bytes_of(req.body)));
        });
        srv.Post("/api/v1/labels", [this](const httplib::Request &req, httplib::Response &res) {
            reply(res, svc.submit_label(req.body));
        });
        srv.Get("/api/v1/tasks", [this](const httplib::Request &, httplib::Response &res) { reply(res, svc.list_tasks()); });
        srv.Get(R"(/api/v1/tasks/([A-Za-z0-9_-]+))", [this](const httplib::Request &req, httplib::Response &res) {
            reply(res, svc.get_task(req.matches[1]));
        });
        srv.Get(R"(/api/v1/sessions/([A-Za-z0-9_-]+))", [this](const httplib::Request &req, httplib::Response &res) {
            reply(res, svc.get_session(req.matches[1]));
        });
        srv.Get("/api/v1/rooms", [this](const httplib::Request &, httplib::Response &res) { reply(res, svc.rooms()); });
        srv.Get("/api/v1/metrics", [this](const httplib::Request &, httplib::Response &res) { reply(res, svc.metrics()); });
        srv.Get("/api/v1/health", [](const httplib::Request &, httplib::Response &res) {
            res.set_content(R"({"status":"ok"})", "application/json");
        });
    }

    void bind() {
        const auto &cfg = svc.config();
        if (cfg.port == 0) {
            port = server->bind_to_any_port(cfg.host);
        } else {
            port = server->bind_to_port(cfg.host, cfg.port) ? cfg.port : -1;
        }
        if (port < 0) throw IoError("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
    }
};

HttpServer::HttpServer(RoomService &service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
    impl_->bind();
    impl_->thread = std::thread([this] { impl_->server->listen_after_bind(); });
    impl_->server->wait_until_ready();
    return impl_->port;
}

void HttpServer::run() {
    impl_->bind();
    impl_->server->listen_after_bind();
}

void HttpServer::stop() {
    if (!impl_) return;
    impl_->server->stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpServer::port() const noexcept { return impl_->port; }

bool HttpServer::tls() const noexcept { return impl_->svc.config().tls(); }

}  // namespace roomrec::service
