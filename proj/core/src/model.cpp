#include "neuromix/model.hpp"

#include <algorithm>
#include <cstring>

#include "neuromix/error.hpp"

namespace neuromix {

Model::Model(ArchSpec arch, std::vector<Layer> layers) : arch_(std::move(arch)), layers_(std::move(layers)) {
    if (arch_.tokens.empty()) throw ConfigError("model needs at least one layer");
}

Model Model::build(const ArchSpec& arch, std::uint64_t seed) {
    std::vector<Layer> layers;
    Shape shape = arch.input_shape;
    for (std::size_t i = 0; i < arch.tokens.size(); ++i) {
        const ArchToken& tok = arch.tokens[i];
        const bool last = i + 1 == arch.tokens.size();
        switch (tok.kind) {
            case ArchToken::Kind::conv:
                layers.emplace_back(Conv2dLayer(shape[0], tok.units, kConvKernel));
                layers.emplace_back(ReluLayer{});
                break;
            case ArchToken::Kind::pool: layers.emplace_back(MaxPool2dLayer{kPoolWindow}); break;
            case ArchToken::Kind::dense:
                layers.emplace_back(DenseLayer(shape_size(shape), tok.units));
                if (!last) layers.emplace_back(ReluLayer{});
                break;
        }
        shape = arch.output_shapes[i];
    }
    std::mt19937_64 rng(seed);
    for (auto& l : layers) kaiming_init(l, rng);
    return Model(arch, std::move(layers));
}

void Model::check_batch(const Tensor& batch) const {
    const Shape& s = batch.shape();
    const Shape& in = arch_.input_shape;
    if (s.size() != in.size() + 1 || !std::equal(in.begin(), in.end(), s.begin() + 1)) {
        throw DimensionError("batch shape " + shape_string(s) + " does not match model input " + shape_string(in));
    }
}

Var Model::forward(Tape& tape, Var batch) {
    check_batch(batch.value());
    Var x = batch;
    for (auto& l : layers_) x = neuromix::forward(l, tape, x);
    return x;
}

Var Model::forward_frozen(Tape& tape, Var batch) const {
    check_batch(batch.value());
    Var x = batch;
    for (const auto& l : layers_) x = neuromix::forward_frozen(l, tape, x);
    return x;
}

Tensor Model::forward_relevance(const Tensor& batch, std::size_t chunk) const {
    check_batch(batch);
    const std::size_t n = batch.dim(0);
    const std::size_t k = clusters();
    const std::size_t stride = batch.size() / n;
    chunk = std::max<std::size_t>(chunk, 1);
    Tensor out({n, k});
    for (std::size_t first = 0; first < n; first += chunk) {
        const std::size_t count = std::min(chunk, n - first);
        Shape shape = batch.shape();
        shape[0] = count;
        std::vector<double> slice(batch.raw() + first * stride, batch.raw() + (first + count) * stride);
        Tape tape;
        Var a = forward_frozen(tape, tape.constant(Tensor(std::move(shape), std::move(slice))));
        std::memcpy(out.raw() + first * k, a.value().raw(), count * k * sizeof(double));
    }
    return out;
}

std::vector<Parameter*> Model::parameters() {
    std::vector<Parameter*> out;
    for (auto& l : layers_) {
        for (Parameter* p : neuromix::parameters(l)) out.push_back(p);
    }
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t total = 0;
    for (const auto& l : layers_) total += neuromix::parameter_count(l);
    return total;
}

void Model::zero_grad() {
    for (Parameter* p : parameters()) p->zero_grad();
}

}  // namespace neuromix
