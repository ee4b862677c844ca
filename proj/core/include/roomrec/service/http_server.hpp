#pragma once

#include <memory>

#include "roomrec/service/service.hpp"

namespace roomrec::service {

/// Binds the RoomService handlers to /api/v1/* over HTTP or HTTPS.
class HttpServer {
  public:
    explicit HttpServer(RoomService &service);
    ~HttpServer();
    HttpServer(const HttpServer &) = delete;
    HttpServer &operator=(const HttpServer &) = delete;

    /// Binds and serves on a background thread; returns the bound port.
    /// Throws ConfigError when TLS material cannot be loaded, IoError when binding fails.
    int start();
    /// Binds and serves on the calling thread until stop().
    void run();
    void stop();

    [[nodiscard]] int port() const noexcept;
    [[nodiscard]] bool tls() const noexcept;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace roomrec::service
