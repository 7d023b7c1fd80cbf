#pragma once

#include <cstddef>
#include <vector>

#include "neuromix/adam.hpp"
#include "neuromix/mixture.hpp"
#include "neuromix/model.hpp"

namespace neuromix {

struct SessionConfig {
    ClusterHeadConfig head;
    // Ablation switch: when false, a* = a (raw relevance scores).
    bool normalize = true;
    // Posterior priors from the previous batch's mean posteriors instead of 1/K.
    bool posterior_priors = false;
    double momentum = 0.9;
    double eps = 1e-5;
};

struct StepReport {
    double loss_em = 0.0;
    double loss_kl = 0.0;
    // Train-mode cluster assignment (argmax of a*) of each batch row, taken
    // before the parameter update.
    std::vector<std::size_t> assignments;
    // Per-cluster batch mean of h, before the parameter update.
    std::vector<double> h_mean;
};

// Owns the optimizers and relevance statistics of one training run over a
// borrowed model. Each step performs exactly one optimizer update per fold.
class ClusterSession {
public:
    ClusterSession(Model& model, SessionConfig config, AdamConfig em = {}, AdamConfig kl = {});

    // Mixture-EM step on original samples only.
    StepReport em_step(const Tensor& batch);
    // Mixture-EM step with the transformed-batch likelihood term (fold 1 only).
    StepReport em_step(const Tensor& batch, const Tensor& batch_tr);
    // Fold 1 as above, then a KL-consistency step with freshly computed
    // posteriors of the updated model.
    StepReport two_fold_step(const Tensor& batch, const Tensor& batch_tr);

    // Eval-mode a* using the running statistics (any batch size >= 1).
    Tensor normalized_relevance(const Tensor& batch) const;
    Tensor likelihoods(const Tensor& batch) const;
    Tensor posteriors(const Tensor& batch) const;
    std::vector<std::size_t> assign(const Tensor& batch) const;

    Model& model() noexcept { return model_; }
    const Model& model() const noexcept { return model_; }
    RelevanceStats& stats() noexcept { return stats_; }
    const RelevanceStats& stats() const noexcept { return stats_; }
    const SessionConfig& config() const noexcept { return config_; }
    const std::vector<double>& priors() const noexcept { return priors_; }
    Adam& em_optimizer() noexcept { return em_opt_; }
    Adam& kl_optimizer() noexcept { return kl_opt_; }

private:
    Var normalized(Var relevance, bool update_running);
    Tensor posterior_of(const Tensor& normalized) const;
    StepReport em_fold(const Tensor& batch, const Tensor* batch_tr);
    double kl_fold(const Tensor& batch, const Tensor& batch_tr);

    Model& model_;
    SessionConfig config_;
    RelevanceStats stats_;
    Adam em_opt_;
    Adam kl_opt_;
    std::vector<double> priors_;
};

// Normalized relevance in eval mode for an arbitrary model and stats; the
// raw scores when `normalize` is false.
Tensor eval_normalized(const Model& model, const RelevanceStats& stats, const Tensor& batch, bool normalize = true);

}  // namespace neuromix
