#include "neuromix/session.hpp"

#include <algorithm>
#include <cmath>

#include "neuromix/error.hpp"

namespace neuromix {

ClusterSession::ClusterSession(Model& model, SessionConfig config, AdamConfig em, AdamConfig kl)
    : model_(model),
      config_(config),
      stats_(model.clusters(), config.momentum, config.eps),
      em_opt_(model.parameters(), em),
      kl_opt_(model.parameters(), kl),
      priors_(model.clusters(), 1.0 / static_cast<double>(model.clusters())) {
    if (config_.head.clusters != model.clusters()) {
        throw ConfigError("cluster count " + std::to_string(config_.head.clusters) + " does not match model output " +
                          std::to_string(model.clusters()));
    }
    config_.head.validate();
}

Var ClusterSession::normalized(Var relevance, bool update_running) {
    if (!config_.normalize) return relevance;
    return normalize_relevance(relevance, stats_, NormMode::train, update_running);
}

Tensor ClusterSession::posterior_of(const Tensor& a_star) const {
    return config_.posterior_priors ? neuromix::posteriors(a_star, priors_) : neuromix::posteriors(a_star);
}

StepReport ClusterSession::em_fold(const Tensor& batch, const Tensor* batch_tr) {
    Tape tape;
    Var a_star = normalized(model_.forward(tape, tape.constant_ref(batch)), true);
    const Tensor p = posterior_of(a_star.value());
    Var logits = likelihood_logits(a_star, config_.head.gamma);

    Var loss;
    if (batch_tr) {
        // The transformed batch is standardized with its own batch statistics
        // and does not feed the running statistics.
        Var a_star_tr = normalized(model_.forward(tape, tape.constant_ref(*batch_tr)), false);
        loss = em_loss_augmented(p, logits, likelihood_logits(a_star_tr, config_.head.gamma));
    } else {
        loss = em_loss(p, logits);
    }

    StepReport report;
    report.loss_em = loss.value()[0];
    if (!std::isfinite(report.loss_em)) throw NumericError("EM loss is not finite");
    report.assignments = argmax_rows(a_star.value());
    report.h_mean = column_means(sigmoid(logits.value()));

    model_.zero_grad();
    tape.backward(loss);
    em_opt_.step();

    if (config_.posterior_priors) {
        priors_ = column_means(p);
        // Keep every cluster reachable.
        for (auto& v : priors_) v = std::max(v, 1e-6);
    }
    return report;
}

double ClusterSession::kl_fold(const Tensor& batch, const Tensor& batch_tr) {
    Tape tape;
    Var a_star = normalized(model_.forward(tape, tape.constant_ref(batch)), false);
    const Tensor p = posterior_of(a_star.value());
    Var a_star_tr = normalized(model_.forward(tape, tape.constant_ref(batch_tr)), false);
    Var loss = kl_consistency(p, a_star_tr);
    const double value = loss.value()[0];
    if (!std::isfinite(value)) throw NumericError("KL loss is not finite");
    model_.zero_grad();
    tape.backward(loss);
    kl_opt_.step();
    return value;
}

StepReport ClusterSession::em_step(const Tensor& batch) { return em_fold(batch, nullptr); }

StepReport ClusterSession::em_step(const Tensor& batch, const Tensor& batch_tr) {
    if (batch.shape() != batch_tr.shape()) throw DimensionError("original and transformed batches differ in shape");
    return em_fold(batch, &batch_tr);
}

StepReport ClusterSession::two_fold_step(const Tensor& batch, const Tensor& batch_tr) {
    StepReport report = em_step(batch, batch_tr);
    report.loss_kl = kl_fold(batch, batch_tr);
    return report;
}

Tensor eval_normalized(const Model& model, const RelevanceStats& stats, const Tensor& batch, bool normalize) {
    Tensor a = model.forward_relevance(batch);
    if (!normalize) return a;
    Tape tape;
    RelevanceStats frozen = stats;
    return normalize_relevance(tape.constant_ref(a), frozen, NormMode::eval).value();
}

Tensor ClusterSession::normalized_relevance(const Tensor& batch) const {
    return eval_normalized(model_, stats_, batch, config_.normalize);
}

Tensor ClusterSession::likelihoods(const Tensor& batch) const {
    return cluster_likelihoods(normalized_relevance(batch), config_.head.gamma);
}

Tensor ClusterSession::posteriors(const Tensor& batch) const { return posterior_of(normalized_relevance(batch)); }

std::vector<std::size_t> ClusterSession::assign(const Tensor& batch) const {
    return argmax_rows(normalized_relevance(batch));
}

}  // namespace neuromix
