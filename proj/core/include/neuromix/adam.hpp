#pragma once

#include <cstddef>
#include <vector>

#include "neuromix/tensor.hpp"

namespace neuromix {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias-corrected moments. Holds its own moment buffers, so two
// optimizers over the same parameters keep independent state.
class Adam {
public:
    // A learning rate of 0 is accepted and makes step() a no-op on values.
    Adam(std::vector<Parameter*> params, AdamConfig config = {});

    // Applies one update from the current Parameter::grad buffers.
    void step();
    void zero_grad();

    std::size_t steps() const noexcept { return t_; }
    const AdamConfig& config() const noexcept { return config_; }
    const std::vector<Tensor>& first_moments() const noexcept { return m_; }
    const std::vector<Tensor>& second_moments() const noexcept { return v_; }

private:
    std::vector<Parameter*> params_;
    AdamConfig config_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::size_t t_ = 0;
};

}  // namespace neuromix
