#include "neuromix/adam.hpp"

#include <cmath>

#include "neuromix/error.hpp"

namespace neuromix {

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : params_(std::move(params)), config_(config) {
    if (!(config_.lr >= 0.0) || !std::isfinite(config_.lr)) throw ConfigError("Adam learning rate must be >= 0");
    if (!(config_.beta1 > 0.0 && config_.beta1 < 1.0) || !(config_.beta2 > 0.0 && config_.beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in (0, 1)");
    }
    if (!(config_.eps > 0.0)) throw ConfigError("Adam eps must be positive");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Parameter* p : params_) {
        m_.emplace_back(p->value.shape());
        v_.emplace_back(p->value.shape());
    }
}

void Adam::step() {
    ++t_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        if (p.grad.shape() != p.value.shape()) {
            throw DimensionError("Adam: gradient shape " + shape_string(p.grad.shape()) + " does not match parameter " +
                                 shape_string(p.value.shape()));
        }
        auto w = p.value.data();
        auto g = p.grad.data();
        auto m = m_[k].data();
        auto v = v_[k].data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

}  // namespace neuromix
