#include "roomrec/service/config.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "roomrec/error.hpp"
#include "roomrec/nn/arch.hpp"

namespace roomrec::service {

using nlohmann::json;

namespace {

long parse_long(const char *name, const char *value) {
    char *end = nullptr;
    const long v = std::strtol(value, &end, 10);
    if (end == value || *end != '\0') throw ConfigError(std::string(name) + ": '" + value + "' is not an integer");
    return v;
}

}  // namespace

void ServiceConfig::validate() const {
    if (port < 0 || port > 65535) throw ConfigError("port: must lie in [0, 65535]");
    if (data_dir.empty()) throw ConfigError("data_dir: must not be empty");
    if (tls_cert.empty() != tls_key.empty()) throw ConfigError("tls: cert and key must be given together");
    if (max_body_bytes < 1024) throw ConfigError("max_body_bytes: must be at least 1024");
    if (max_batch_records == 0) throw ConfigError("max_batch_records: must be positive");
    if (max_steps <= 0 || eval_every <= 0 || patience <= 0) throw ConfigError("training limits must be positive");
    if (!(val_fraction > 0 && test_fraction > 0 && val_fraction + test_fraction < 1))
        throw ConfigError("split fractions must be positive and sum below 1");
    if (!(session_ttl_s > 0)) throw ConfigError("session_ttl_s: must be positive");
    if (threads < 1) throw ConfigError("threads: must be positive");
    try {
        (void)nn::build_named_arch(arch, 2);
    } catch (const ArgumentError &) {
        throw ConfigError("arch: unknown architecture '" + arch + "'");
    }
}

void ServiceConfig::merge_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto &k = it.key();
        const auto &v = it.value();
        try {
            if (k == "host") host = v.get<std::string>();
            else if (k == "port") port = v.get<int>();
            else if (k == "data_dir") data_dir = v.get<std::string>();
            else if (k == "tls_cert") tls_cert = v.get<std::string>();
            else if (k == "tls_key") tls_key = v.get<std::string>();
            else if (k == "max_body_bytes") max_body_bytes = v.get<std::size_t>();
            else if (k == "max_batch_records") max_batch_records = v.get<std::size_t>();
            else if (k == "arch") arch = v.get<std::string>();
            else if (k == "max_steps") max_steps = v.get<long>();
            else if (k == "eval_every") eval_every = v.get<long>();
            else if (k == "patience") patience = v.get<int>();
            else if (k == "train_seed") train_seed = v.get<std::uint64_t>();
            else if (k == "split_seed") split_seed = v.get<std::uint64_t>();
            else if (k == "val_fraction") val_fraction = v.get<double>();
            else if (k == "test_fraction") test_fraction = v.get<double>();
            else if (k == "session_ttl_s") session_ttl_s = v.get<double>();
            else if (k == "threads") threads = v.get<int>();
            else if (k == "request_log") request_log = v.get<bool>();
            else throw ConfigError(k + ": unknown configuration key");
        } catch (const json::exception &e) {
            throw ConfigError(k + ": " + e.what());
        }
    }
}

void ServiceConfig::apply_env() {
    if (const char *v = std::getenv("ROOMREC_PORT")) port = static_cast<int>(parse_long("ROOMREC_PORT", v));
    if (const char *v = std::getenv("ROOMREC_DATA_DIR")) data_dir = v;
    if (const char *v = std::getenv("ROOMREC_TLS_CERT")) tls_cert = v;
    if (const char *v = std::getenv("ROOMREC_TLS_KEY")) tls_key = v;
    if (const char *v = std::getenv("ROOMREC_MAX_STEPS")) max_steps = parse_long("ROOMREC_MAX_STEPS", v);
}

std::string ServiceConfig::to_json() const {
    return json{{"host", host},
                {"port", port},
                {"data_dir", data_dir.string()},
                {"tls", tls()},
                {"max_body_bytes", max_body_bytes},
                {"max_batch_records", max_batch_records},
                {"arch", arch},
                {"max_steps", max_steps},
                {"eval_every", eval_every},
                {"patience", patience},
                {"train_seed", train_seed},
                {"split_seed", split_seed},
                {"val_fraction", val_fraction},
                {"test_fraction", test_fraction},
                {"session_ttl_s", session_ttl_s},
                {"threads", threads},
                {"request_log", request_log}}
        .dump();
}

ServiceConfig load_config(const std::optional<std::filesystem::path> &file) {
    ServiceConfig cfg;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError("cannot read config file " + file->string());
        cfg.merge_json(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
    }
    cfg.apply_env();
    cfg.validate();
    return cfg;
}

}  // namespace roomrec::service
