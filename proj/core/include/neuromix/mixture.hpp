#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "neuromix/ops.hpp"
#include "neuromix/tape.hpp"
#include "neuromix/tensor.hpp"

namespace neuromix {

enum class NormMode { train, eval };

// Running per-cluster mean and std of the relevance scores. Updated as
// running = momentum * running + (1 - momentum) * batch.
struct RelevanceStats {
    std::vector<double> mu;
    std::vector<double> sigma;
    double momentum = 0.9;
    double eps = 1e-5;

    RelevanceStats() = default;
    explicit RelevanceStats(std::size_t clusters, double momentum = 0.9, double eps = 1e-5);

    std::size_t clusters() const noexcept { return mu.size(); }
    void update(const ColumnMoments& batch);
};

// Cluster head hyperparameters. validate() rejects gamma <= 1 and any gamma
// that lets ((n-1)/sqrt(n)) / gamma exceed kMaxSigmoidInput, the edge of the
// region treated as near-linear for the sigmoid.
struct ClusterHeadConfig {
    static constexpr double kMaxSigmoidInput = 2.31;

    std::size_t clusters = 10;
    double gamma = 5.0;
    std::size_t batch_size = 128;

    void validate() const;
};

// Largest |a*| attainable for a batch of n under the stated bound (n-1)/sqrt(n).
double normalized_score_bound(std::size_t n);

// a*_ij = (a_ij - mu_j) / sigma_j. Train mode uses the batch's own statistics
// (n >= 2, gradient flows through them) and folds them into `stats` when
// `update_running` is set; eval mode uses the running statistics.
Var normalize_relevance(Var relevance, RelevanceStats& stats, NormMode mode, bool update_running = true);
Tensor normalize_relevance(const Tensor& relevance, RelevanceStats& stats, NormMode mode);

// h = sigmoid(a* / gamma)
Tensor cluster_likelihoods(const Tensor& normalized, double gamma);
// a* / gamma, the logits of the cluster likelihoods.
Var likelihood_logits(Var normalized, double gamma);

// Row softmax of a*. With priors, softmax(a* + log prior).
Tensor posteriors(const Tensor& normalized);
Tensor posteriors(const Tensor& normalized, std::span<const double> priors);

// -(1/n) sum_ij p_ij log h_ij. The Tensor form takes likelihoods h in (0, 1];
// the Var form takes likelihood logits and uses log(sigmoid(z)) = -softplus(-z).
double em_loss(const Tensor& posteriors, const Tensor& likelihoods);
Var em_loss(const Tensor& posteriors, Var logits);

// em_loss(P, H) + em_loss(P, H_tr)
double em_loss_augmented(const Tensor& posteriors, const Tensor& likelihoods, const Tensor& likelihoods_tr);
Var em_loss_augmented(const Tensor& posteriors, Var logits, Var logits_tr);

// (1/n) sum_ij p_ij log(p_ij / q_ij) with 0 log(0/q) = 0. The Var form takes
// the normalized relevances of the transformed batch and applies the softmax.
double kl_consistency(const Tensor& p, const Tensor& q);
Var kl_consistency(const Tensor& p, Var normalized_tr);

struct MonteCarloReport {
    // Per-cluster batch mean of h. Proportional to the integral of the
    // cluster distribution over the sampled space, which is ~0.5 V.
    std::vector<double> h_mean;
    std::vector<std::size_t> flagged;  // clusters with |mean - 0.5| > tolerance
    double tolerance = 0.02;

    bool ok() const noexcept { return flagged.empty(); }
};

MonteCarloReport monte_carlo_check(const Tensor& likelihoods, double tolerance = 0.02);

std::vector<double> column_means(const Tensor& m);

// Row argmax; ties resolve to the lowest column index.
std::vector<std::size_t> argmax_rows(const Tensor& m);

}  // namespace neuromix
