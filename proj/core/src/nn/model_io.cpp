#include "roomrec/nn/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "roomrec/error.hpp"

namespace roomrec::nn {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'R', 'R', 'M', '1'};
constexpr int kFormatVersion = 1;

void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t *p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<float> ModelBundle::logits(std::span<const float> raw_rows, std::size_t n) const {
    if (raw_rows.size() != n * net.input_size())
        throw ShapeError("expected " + std::to_string(n) + " rows of " + std::to_string(net.input_size()) +
                         " features");
    if (normalizer.empty()) return net.logits(raw_rows, n);
    const auto z = normalizer.apply_all(raw_rows);
    return net.logits(z, n);
}

std::vector<double> ModelBundle::probabilities(std::span<const float> raw_rows, std::size_t n) const {
    const auto z = logits(raw_rows, n);
    const std::size_t k = num_classes();
    std::vector<double> p(z.size());
    for (std::size_t s = 0; s < n; ++s) {
        double mx = z[s * k];
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(z[s * k + j]));
        double sum = 0;
        for (std::size_t j = 0; j < k; ++j) sum += p[s * k + j] = std::exp(z[s * k + j] - mx);
        for (std::size_t j = 0; j < k; ++j) p[s * k + j] /= sum;
    }
    return p;
}

void ModelBundle::validate() const {
    if (labels.size() != num_classes())
        throw ShapeError("model has " + std::to_string(num_classes()) + " outputs but " +
                         std::to_string(labels.size()) + " labels");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i].class_index != static_cast<int>(i)) throw ShapeError("labels are not in class-index order");
    if (net.input_size() != feature_dim(input))
        throw ShapeError("network input size " + std::to_string(net.input_size()) + " does not match " +
                         std::string(to_string(input)) + " features");
    if (!normalizer.empty() &&
        (normalizer.mean.size() != net.input_size() || normalizer.stddev.size() != net.input_size()))
        throw ShapeError("normalizer width does not match the network input");
}

std::vector<std::uint8_t> serialize_model(const ModelBundle &m) {
    m.validate();
    json params = json::array();
    for (const auto &p : m.net.params()) params.push_back({{"name", p.name}, {"shape", p.value.shape()}});
    json labels = json::array();
    for (const auto &l : m.labels) labels.push_back(l.label_id);
    const json header{{"format", kFormatVersion},
                      {"version", m.version},
                      {"input", std::string(to_string(m.input))},
                      {"arch", json::parse(m.arch().to_json())},
                      {"labels", labels},
                      {"normalizer", {{"mean", m.normalizer.mean}, {"std", m.normalizer.stddev}}},
                      {"params", params}};
    const std::string text = header.dump();

    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    for (const auto &p : m.net.params())
        for (float v : p.value.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

ModelBundle deserialize_model(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("magic", "not a model file");
    const std::uint32_t hlen = get_u32(bytes.data() + 4);
    if (bytes.size() < 8 + static_cast<std::size_t>(hlen)) throw FormatError("header", "truncated header");
    json header;
    try {
        header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + hlen);
    } catch (const json::exception &e) {
        throw FormatError("header", e.what());
    }

    ModelBundle m;
    try {
        if (header.at("format").get<int>() != kFormatVersion) throw FormatError("format", "unsupported format");
        m.version = header.at("version").get<std::uint64_t>();
        m.input = input_kind_from_string(header.at("input").get<std::string>());
        m.net = Network<float>(CnnArch::from_json(header.at("arch").dump()));
        const auto names = header.at("labels").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < names.size(); ++i) m.labels.push_back({names[i], static_cast<int>(i)});
        m.normalizer.mean = header.at("normalizer").at("mean").get<std::vector<double>>();
        m.normalizer.stddev = header.at("normalizer").at("std").get<std::vector<double>>();
        const auto &params = header.at("params");
        if (params.size() != m.net.params().size()) throw FormatError("params", "parameter count mismatch");
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto &p = m.net.params()[i];
            if (params[i].at("name").get<std::string>() != p.name ||
                params[i].at("shape").get<Shape>() != p.value.shape())
                throw FormatError("params", "parameter " + p.name + " does not match the architecture");
        }
    } catch (const json::exception &e) {
        throw FormatError("header", e.what());
    }

    std::size_t off = 8 + hlen;
    std::size_t need = 0;
    for (const auto &p : m.net.params()) need += p.value.size() * 4;
    if (bytes.size() - off != need)
        throw FormatError("weights", "expected " + std::to_string(need) + " weight bytes, found " +
                                         std::to_string(bytes.size() - off));
    for (auto &p : m.net.params())
        for (float &v : p.value.data()) {
            v = std::bit_cast<float>(get_u32(bytes.data() + off));
            off += 4;
        }
    m.validate();
    return m;
}

void save_model(const ModelBundle &m, const std::filesystem::path &path) {
    const auto bytes = serialize_model(m);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot commit " + path.string() + ": " + ec.message());
}

ModelBundle load_model(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace roomrec::nn
