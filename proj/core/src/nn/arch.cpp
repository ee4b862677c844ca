#include "roomrec/nn/arch.hpp"

#include <algorithm>

#include "json.hpp"
#include "roomrec/error.hpp"

namespace roomrec::nn {

using nlohmann::json;

std::string_view to_string(LayerKind k) {
    switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
    case LayerKind::dropout: return "dropout";
    case LayerKind::softmax: return "softmax";
    }
    return "?";
}

namespace {

LayerKind kind_from_string(const std::string &s) {
    for (auto k : {LayerKind::conv, LayerKind::maxpool, LayerKind::flatten, LayerKind::dense, LayerKind::dropout,
                   LayerKind::softmax})
        if (to_string(k) == s) return k;
    throw FormatError("kind", "unknown layer kind '" + s + "'");
}

std::string dims_string(const Dims &d) {
    return std::to_string(d.h) + "x" + std::to_string(d.w) + "x" + std::to_string(d.c);
}

}  // namespace

std::vector<Dims> CnnArch::output_dims() const {
    std::vector<Dims> out;
    Dims d = input;
    if (d.size() == 0) throw ShapeError(name + ": empty input shape");
    for (const auto &l : layers) {
        switch (l.kind) {
        case LayerKind::conv: {
            if (l.filters == 0 || l.kernel_h == 0 || l.kernel_w == 0 || l.stride == 0)
                throw ArgumentError(l.name + ": conv parameters must be positive");
            if (l.padding == Padding::same) {
                d = {(d.h + l.stride - 1) / l.stride, (d.w + l.stride - 1) / l.stride, l.filters};
            } else {
                if (l.kernel_h > d.h || l.kernel_w > d.w)
                    throw ShapeError(l.name + ": kernel larger than input " + dims_string(d));
                d = {(d.h - l.kernel_h) / l.stride + 1, (d.w - l.kernel_w) / l.stride + 1, l.filters};
            }
            break;
        }
        case LayerKind::maxpool:
            if (l.kernel_h == 0 || l.kernel_w == 0) throw ArgumentError(l.name + ": pool window must be positive");
            if (l.kernel_h > d.h || l.kernel_w > d.w)
                throw ShapeError(l.name + ": pool window larger than input " + dims_string(d));
            d = {d.h / l.kernel_h, d.w / l.kernel_w, d.c};
            break;
        case LayerKind::flatten: d = {1, 1, d.size()}; break;
        case LayerKind::dense:
            if (l.units == 0) throw ArgumentError(l.name + ": dense units must be positive");
            if (d.h != 1 || d.w != 1) throw ShapeError(l.name + ": dense layer needs a flattened input");
            d = {1, 1, l.units};
            break;
        case LayerKind::dropout:
            if (!(l.rate >= 0.0 && l.rate < 1.0)) throw ArgumentError(l.name + ": dropout rate must lie in [0, 1)");
            break;
        case LayerKind::softmax: break;
        }
        out.push_back(d);
    }
    return out;
}

void CnnArch::validate() const {
    const auto dims = output_dims();
    if (num_classes < 1) throw ArgumentError(name + ": num_classes must be positive");
    auto last_dense = std::find_if(layers.rbegin(), layers.rend(), [](const LayerSpec &l) { return l.kind == LayerKind::dense; });
    if (last_dense == layers.rend()) throw ArgumentError(name + ": network has no dense output layer");
    if (last_dense->units != num_classes)
        throw ShapeError(name + ": final dense layer has " + std::to_string(last_dense->units) + " units, K is " +
                         std::to_string(num_classes));
    for (auto it = layers.rbegin(); it != last_dense; ++it)
        if (it->kind != LayerKind::softmax) throw ArgumentError(name + ": only softmax may follow the output layer");
    for (std::size_t i = 0; i + 1 < layers.size(); ++i)
        if (layers[i].kind == LayerKind::softmax) throw ArgumentError(name + ": softmax must be the last layer");
    (void)dims;
}

std::size_t count_params(const CnnArch &arch) {
    if (arch.layers.empty()) return 0;
    const auto dims = arch.output_dims();
    std::size_t total = 0;
    Dims in = arch.input;
    for (std::size_t i = 0; i < arch.layers.size(); ++i) {
        const auto &l = arch.layers[i];
        if (l.kind == LayerKind::conv) total += l.kernel_h * l.kernel_w * in.c * l.filters + l.filters;
        if (l.kind == LayerKind::dense) total += in.size() * l.units + l.units;
        in = dims[i];
    }
    return total;
}

std::string CnnArch::to_json() const {
    json ls = json::array();
    for (const auto &l : layers) {
        json j{{"kind", std::string(nn::to_string(l.kind))}, {"name", l.name}};
        switch (l.kind) {
        case LayerKind::conv:
            j["filters"] = l.filters;
            j["kernel"] = {l.kernel_h, l.kernel_w};
            j["stride"] = l.stride;
            j["padding"] = l.padding == Padding::same ? "same" : "valid";
            j["relu"] = l.relu;
            break;
        case LayerKind::maxpool: j["window"] = {l.kernel_h, l.kernel_w}; break;
        case LayerKind::dense:
            j["units"] = l.units;
            j["relu"] = l.relu;
            break;
        case LayerKind::dropout: j["rate"] = l.rate; break;
        default: break;
        }
        ls.push_back(std::move(j));
    }
    return json{{"name", name}, {"input", {input.h, input.w, input.c}}, {"num_classes", num_classes}, {"layers", ls}}
        .dump();
}

CnnArch CnnArch::from_json(const std::string &text) {
    CnnArch a;
    try {
        auto j = json::parse(text);
        a.name = j.at("name").get<std::string>();
        auto in = j.at("input").get<std::vector<std::size_t>>();
        if (in.size() != 3) throw FormatError("input", "expected [h, w, c]");
        a.input = {in[0], in[1], in[2]};
        a.num_classes = j.at("num_classes").get<std::size_t>();
        for (const auto &lj : j.at("layers")) {
            LayerSpec l;
            l.kind = kind_from_string(lj.at("kind").get<std::string>());
            l.name = lj.value("name", "");
            if (l.kind == LayerKind::conv) {
                l.filters = lj.at("filters").get<std::size_t>();
                auto k = lj.at("kernel").get<std::vector<std::size_t>>();
                if (k.size() != 2) throw FormatError("kernel", "expected [h, w]");
                l.kernel_h = k[0];
                l.kernel_w = k[1];
                l.stride = lj.value("stride", std::size_t{1});
                l.padding = lj.value("padding", std::string("same")) == "valid" ? Padding::valid : Padding::same;
                l.relu = lj.value("relu", true);
            } else if (l.kind == LayerKind::maxpool) {
                auto k = lj.at("window").get<std::vector<std::size_t>>();
                if (k.size() != 2) throw FormatError("window", "expected [h, w]");
                l.kernel_h = k[0];
                l.kernel_w = k[1];
            } else if (l.kind == LayerKind::dense) {
                l.units = lj.at("units").get<std::size_t>();
                l.relu = lj.value("relu", true);
            } else if (l.kind == LayerKind::dropout) {
                l.rate = lj.at("rate").get<double>();
            }
            a.layers.push_back(std::move(l));
        }
    } catch (const json::exception &e) {
        throw FormatError("arch", e.what());
    }
    a.validate();
    return a;
}

CnnArch build_cnn(const CnnOptions &opts, std::size_t num_classes, std::string name) {
    CnnArch a;
    a.name = std::move(name);
    a.input = opts.input;
    a.num_classes = num_classes;
    std::size_t pools = 0;
    for (std::size_t i = 0; i < opts.conv_filters.size(); ++i) {
        LayerSpec conv;
        conv.kind = LayerKind::conv;
        conv.name = "conv" + std::to_string(i + 1);
        conv.filters = opts.conv_filters[i];
        conv.kernel_h = opts.one_dimensional ? 1 : opts.kernel;
        conv.kernel_w = opts.kernel;
        a.layers.push_back(conv);
        if (i < opts.pooled_convs) {
            LayerSpec pool;
            pool.kind = LayerKind::maxpool;
            pool.name = "pool" + std::to_string(++pools);
            pool.kernel_h = opts.one_dimensional ? 1 : 2;
            pool.kernel_w = 2;
            a.layers.push_back(pool);
        }
    }
    a.layers.push_back({.kind = LayerKind::flatten, .name = "flatten"});
    for (std::size_t i = 0; i + 1 < opts.dense_layers; ++i) {
        a.layers.push_back({.kind = LayerKind::dense, .name = "dense" + std::to_string(i + 1), .units = opts.dense_units});
        if (opts.dropout > 0.0)
            a.layers.push_back({.kind = LayerKind::dropout, .name = "dropout" + std::to_string(i + 1), .rate = opts.dropout});
    }
    a.layers.push_back({.kind = LayerKind::dense,
                        .name = "dense" + std::to_string(std::max<std::size_t>(opts.dense_layers, 1)),
                        .units = num_classes,
                        .relu = false});
    a.layers.push_back({.kind = LayerKind::softmax, .name = "softmax"});
    a.validate();
    return a;
}

namespace {

CnnArch build_dnn(Dims input, std::size_t k, std::string name) {
    CnnArch a;
    a.name = std::move(name);
    a.input = input;
    a.num_classes = k;
    a.layers.push_back({.kind = LayerKind::flatten, .name = "flatten"});
    a.layers.push_back({.kind = LayerKind::dense, .name = "dense1", .units = 256});
    a.layers.push_back({.kind = LayerKind::dense, .name = "dense2", .units = 256});
    a.layers.push_back({.kind = LayerKind::dense, .name = "dense3", .units = k, .relu = false});
    a.layers.push_back({.kind = LayerKind::softmax, .name = "softmax"});
    a.validate();
    return a;
}

}  // namespace

std::vector<std::string> named_archs() {
    return {"CNN-A", "CNN-B", "CNN-C", "CNN-D", "CNN-E", "CNN-F", "CNN-G", "CNN-psd", "DNN-psd", "DNN-spec"};
}

CnnArch build_named_arch(std::string_view name, std::size_t k) {
    std::string n(name);
    if (n.size() == 1) n = "CNN-" + n;
    CnnOptions o;
    if (n == "CNN-A") {
        o.conv_filters = {16};
        o.pooled_convs = 1;
    } else if (n == "CNN-B") {
        o.conv_filters = {16, 16};
    } else if (n == "CNN-C") {
        o.conv_filters = {16, 32};
    } else if (n == "CNN-D") {
        o.conv_filters = {32, 32};
    } else if (n == "CNN-E") {
        o.conv_filters = {16, 32, 64};
    } else if (n == "CNN-F") {
        o.conv_filters = {16, 32, 64, 128};
    } else if (n == "CNN-G") {
        o.conv_filters = {16, 32, 64, 128, 256};
    } else if (n == "CNN-psd") {
        o.input = kPsdInput;
        o.one_dimensional = true;
    } else if (n == "DNN-psd") {
        return build_dnn(kPsdInput, k, n);
    } else if (n == "DNN-spec") {
        return build_dnn(kSpectrogramInput, k, n);
    } else {
        throw ArgumentError("unknown architecture '" + std::string(name) + "'");
    }
    return build_cnn(o, k, n);
}

}  // namespace roomrec::nn
