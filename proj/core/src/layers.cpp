#include "neuromix/layers.hpp"

#include <cmath>
#include <string>

#include "neuromix/error.hpp"
#include "neuromix/ops.hpp"

namespace neuromix {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

DenseLayer::DenseLayer(std::size_t in, std::size_t out)
    : weight(Tensor({in, out})), bias(Tensor({out})) {}

Conv2dLayer::Conv2dLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
    : weight(Tensor({out_channels, in_channels, kernel, kernel})), bias(Tensor({out_channels})) {}

LayerKind layer_kind(const Layer& layer) {
    return std::visit(overloaded{
                          [](const DenseLayer&) { return LayerKind::dense; },
                          [](const Conv2dLayer&) { return LayerKind::conv2d; },
                          [](const MaxPool2dLayer&) { return LayerKind::maxpool2d; },
                          [](const ReluLayer&) { return LayerKind::relu; },
                      },
                      layer);
}

std::string_view layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::maxpool2d: return "maxpool2d";
        case LayerKind::relu: return "relu";
    }
    return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
    for (auto k : {LayerKind::dense, LayerKind::conv2d, LayerKind::maxpool2d, LayerKind::relu}) {
        if (layer_kind_name(k) == name) return k;
    }
    throw FormatError("unknown layer kind '" + std::string(name) + "'");
}

namespace {

Var flatten_if_needed(Var x) { return x.value().rank() > 2 ? flatten(x) : x; }

template <typename L, typename Bind>
Var forward_impl(L& layer, Var x, Bind bind) {
    if (auto* d = std::get_if<DenseLayer>(&layer)) return dense(flatten_if_needed(x), bind(d->weight), bind(d->bias));
    if (auto* c = std::get_if<Conv2dLayer>(&layer)) return conv2d(x, bind(c->weight), bind(c->bias));
    if (auto* m = std::get_if<MaxPool2dLayer>(&layer)) return maxpool2d(x, m->window);
    return relu(x);
}

}  // namespace

Var forward(Layer& layer, Tape& tape, Var x) {
    return forward_impl(layer, x, [&](Parameter& p) { return tape.parameter(p); });
}

Var forward_frozen(const Layer& layer, Tape& tape, Var x) {
    return forward_impl(layer, x, [&](const Parameter& p) { return tape.constant_ref(p.value); });
}

std::vector<Parameter*> parameters(Layer& layer) {
    if (auto* d = std::get_if<DenseLayer>(&layer)) return {&d->weight, &d->bias};
    if (auto* c = std::get_if<Conv2dLayer>(&layer)) return {&c->weight, &c->bias};
    return {};
}

std::size_t parameter_count(const Layer& layer) {
    if (auto* d = std::get_if<DenseLayer>(&layer)) return d->weight.value.size() + d->bias.value.size();
    if (auto* c = std::get_if<Conv2dLayer>(&layer)) return c->weight.value.size() + c->bias.value.size();
    return 0;
}

void kaiming_init(Layer& layer, std::mt19937_64& rng) {
    auto init = [&rng](Parameter& w, Parameter& b, std::size_t fan_in) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        for (auto& v : w.value.data()) v = dist(rng);
        b.value.fill(0.0);
        w.zero_grad();
        b.zero_grad();
    };
    if (auto* d = std::get_if<DenseLayer>(&layer)) init(d->weight, d->bias, d->in_features());
    if (auto* c = std::get_if<Conv2dLayer>(&layer)) {
        init(c->weight, c->bias, c->in_channels() * c->kernel() * c->kernel());
    }
}

}  // namespace neuromix
