#include "neuromix/checkpoint.hpp"

#include <fstream>

#include "neuromix/error.hpp"

namespace neuromix {

namespace {

using nlohmann::json;

json tensor_json(const Tensor& t) { return json{{"shape", t.shape()}, {"data", t.data()}}; }

void load_tensor(const json& j, Tensor& dst, const char* what) {
    const auto shape = j.at("shape").get<Shape>();
    if (shape != dst.shape()) {
        throw FormatError(std::string("checkpoint ") + what + " shape " + shape_string(shape) +
                          " does not match architecture " + shape_string(dst.shape()));
    }
    auto data = j.at("data").get<std::vector<double>>();
    dst = Tensor(shape, std::move(data));
    if (!dst.all_finite()) throw FormatError(std::string("checkpoint ") + what + " contains non-finite values");
}

}  // namespace

json checkpoint_to_json(const Model& model, const RelevanceStats& stats, const json& config) {
    json layers = json::array();
    for (const Layer& l : model.layers()) {
        json e;
        e["kind"] = layer_kind_name(layer_kind(l));
        if (auto* d = std::get_if<DenseLayer>(&l)) {
            e["in"] = d->in_features();
            e["out"] = d->out_features();
            e["weight"] = tensor_json(d->weight.value);
            e["bias"] = tensor_json(d->bias.value);
        } else if (auto* c = std::get_if<Conv2dLayer>(&l)) {
            e["in_channels"] = c->in_channels();
            e["out_channels"] = c->out_channels();
            e["kernel"] = c->kernel();
            e["weight"] = tensor_json(c->weight.value);
            e["bias"] = tensor_json(c->bias.value);
        } else if (auto* m = std::get_if<MaxPool2dLayer>(&l)) {
            e["window"] = m->window;
        }
        layers.push_back(std::move(e));
    }
    return json{
        {"format", kCheckpointFormat},
        {"arch", model.arch().render()},
        {"input_shape", model.input_shape()},
        {"layers", std::move(layers)},
        {"stats", {{"mu", stats.mu}, {"sigma", stats.sigma}, {"momentum", stats.momentum}, {"eps", stats.eps}}},
        {"config", config},
    };
}

Checkpoint checkpoint_from_json(const json& j) {
    try {
        if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
            throw FormatError("not a " + std::string(kCheckpointFormat) + " checkpoint");
        }
        const ArchSpec arch = parse_arch(j.at("arch").get<std::string>(), j.at("input_shape").get<Shape>());
        Model model = Model::build(arch, 0);
        const json& layers = j.at("layers");
        if (!layers.is_array() || layers.size() != model.layers().size()) {
            throw FormatError("checkpoint layer list does not match its architecture");
        }
        for (std::size_t i = 0; i < layers.size(); ++i) {
            Layer& l = model.layers()[i];
            if (parse_layer_kind(layers[i].at("kind").get<std::string>()) != layer_kind(l)) {
                throw FormatError("checkpoint layer " + std::to_string(i) + " kind does not match its architecture");
            }
            if (auto* d = std::get_if<DenseLayer>(&l)) {
                load_tensor(layers[i].at("weight"), d->weight.value, "dense weight");
                load_tensor(layers[i].at("bias"), d->bias.value, "dense bias");
            } else if (auto* c = std::get_if<Conv2dLayer>(&l)) {
                load_tensor(layers[i].at("weight"), c->weight.value, "conv weight");
                load_tensor(layers[i].at("bias"), c->bias.value, "conv bias");
            }
        }
        model.zero_grad();

        const json& s = j.at("stats");
        RelevanceStats stats(model.clusters(), s.at("momentum").get<double>(), s.at("eps").get<double>());
        stats.mu = s.at("mu").get<std::vector<double>>();
        stats.sigma = s.at("sigma").get<std::vector<double>>();
        if (stats.mu.size() != model.clusters() || stats.sigma.size() != model.clusters()) {
            throw FormatError("checkpoint statistics do not match the cluster count");
        }
        for (double v : stats.sigma) {
            if (!(v >= stats.eps)) throw FormatError("checkpoint sigma below eps");
        }
        return Checkpoint{std::move(model), std::move(stats), j.value("config", json::object())};
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    } catch (const ParseError& e) {
        throw FormatError(std::string("checkpoint architecture: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint statistics: ") + e.what());
    } catch (const DimensionError& e) {
        throw FormatError(std::string("checkpoint tensors: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const RelevanceStats& stats,
                     const json& config) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out << checkpoint_to_json(model, stats, config).dump();
    if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open checkpoint " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    return checkpoint_from_json(j);
}

}  // namespace neuromix
