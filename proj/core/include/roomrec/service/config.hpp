#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace roomrec::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  ///< 0 binds an ephemeral port
    std::filesystem::path data_dir = "roomrec-data";
    std::string tls_cert;  ///< TLS is enabled when both cert and key are set
    std::string tls_key;
    std::size_t max_body_bytes = 8u << 20;
    std::size_t max_batch_records = 500;
    std::string arch = "CNN-C";
    long max_steps = 10000;
    long eval_every = 100;
    int patience = 10;
    std::uint64_t train_seed = 1;
    std::uint64_t split_seed = 2018;
    double val_fraction = 0.25;
    double test_fraction = 0.25;
    double session_ttl_s = 24.0 * 3600.0;
    int threads = 8;
    bool request_log = true;

    [[nodiscard]] bool tls() const noexcept { return !tls_cert.empty() && !tls_key.empty(); }

    /// Throws ConfigError naming the offending key.
    void validate() const;

    /// Keys absent from the document keep their current values. Unknown keys are rejected.
    void merge_json(const std::string &text);

    /// ROOMREC_PORT, ROOMREC_DATA_DIR, ROOMREC_TLS_CERT, ROOMREC_TLS_KEY, ROOMREC_MAX_STEPS.
    void apply_env();

    std::string to_json() const;
};

/// Defaults, then the optional JSON file, then environment overrides; validated.
ServiceConfig load_config(const std::optional<std::filesystem::path> &file);

}  // namespace roomrec::service
