#pragma once

#include <cstddef>
#include <random>
#include <string_view>
#include <variant>
#include <vector>

#include "neuromix/tape.hpp"
#include "neuromix/tensor.hpp"

namespace neuromix {

// weight (in, out), bias (out). Inputs of rank > 2 are flattened first.
struct DenseLayer {
    Parameter weight;
    Parameter bias;

    DenseLayer(std::size_t in, std::size_t out);
    std::size_t in_features() const { return weight.value.dim(0); }
    std::size_t out_features() const { return weight.value.dim(1); }
};

// weight (out_ch, in_ch, k, k), bias (out_ch); stride 1, same padding.
struct Conv2dLayer {
    Parameter weight;
    Parameter bias;

    Conv2dLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);
    std::size_t in_channels() const { return weight.value.dim(1); }
    std::size_t out_channels() const { return weight.value.dim(0); }
    std::size_t kernel() const { return weight.value.dim(2); }
};

struct MaxPool2dLayer {
    std::size_t window = 2;
};

struct ReluLayer {};

using Layer = std::variant<DenseLayer, Conv2dLayer, MaxPool2dLayer, ReluLayer>;

enum class LayerKind { dense, conv2d, maxpool2d, relu };

LayerKind layer_kind(const Layer& layer);
std::string_view layer_kind_name(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

// Records the layer on `tape`. Parameters are bound as trainable leaves, so
// backward() accumulates into their grad buffers.
Var forward(Layer& layer, Tape& tape, Var x);
// Same computation with parameters bound as constants; never mutates `layer`.
Var forward_frozen(const Layer& layer, Tape& tape, Var x);

std::vector<Parameter*> parameters(Layer& layer);
std::size_t parameter_count(const Layer& layer);

// Fan-in scaled normal weights (std = sqrt(2 / fan_in)), zero biases.
void kaiming_init(Layer& layer, std::mt19937_64& rng);

}  // namespace neuromix
