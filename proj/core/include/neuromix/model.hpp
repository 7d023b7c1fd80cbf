#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "neuromix/arch.hpp"
#include "neuromix/layers.hpp"
#include "neuromix/tape.hpp"

namespace neuromix {

// Ordered layer stack mapping a batch (n, input_shape...) to relevance
// scores A (n, K). Hidden conv/dense layers are followed by ReLU; the final
// dense layer is linear and its K output columns are the cluster-specific
// parameters.
class Model {
public:
    Model(ArchSpec arch, std::vector<Layer> layers);

    // Kaiming-initialized model; identical seeds give identical parameters.
    static Model build(const ArchSpec& arch, std::uint64_t seed);

    Var forward(Tape& tape, Var batch);
    Var forward_frozen(Tape& tape, Var batch) const;

    // Raw relevance scores without recording gradients. Processes the batch
    // in chunks; rows never interact, so chunking only affects rounding.
    Tensor forward_relevance(const Tensor& batch, std::size_t chunk = 256) const;

    std::vector<Parameter*> parameters();
    std::size_t parameter_count() const;
    void zero_grad();

    const ArchSpec& arch() const noexcept { return arch_; }
    const Shape& input_shape() const noexcept { return arch_.input_shape; }
    std::size_t clusters() const noexcept { return arch_.clusters(); }
    std::vector<Layer>& layers() noexcept { return layers_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }

    // Throws DimensionError unless `batch` is (n, input_shape...).
    void check_batch(const Tensor& batch) const;

private:
    ArchSpec arch_;
    std::vector<Layer> layers_;
};

// Relevance scores for `batch`: forward_relevance as a free function.
inline Tensor forward_relevance(const Model& model, const Tensor& batch) { return model.forward_relevance(batch); }

}  // namespace neuromix
