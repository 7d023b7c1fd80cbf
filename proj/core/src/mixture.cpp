#include "neuromix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neuromix/error.hpp"

namespace neuromix {

RelevanceStats::RelevanceStats(std::size_t clusters, double momentum_, double eps_)
    : mu(clusters, 0.0), sigma(clusters, 1.0), momentum(momentum_), eps(eps_) {
    if (!(momentum > 0.0 && momentum < 1.0)) throw ConfigError("running-stats momentum must lie in (0, 1)");
    if (!(eps > 0.0)) throw ConfigError("running-stats eps must be positive");
}

void RelevanceStats::update(const ColumnMoments& batch) {
    if (batch.mean.size() != mu.size()) throw DimensionError("running stats: cluster count mismatch");
    for (std::size_t j = 0; j < mu.size(); ++j) {
        mu[j] = momentum * mu[j] + (1.0 - momentum) * batch.mean[j];
        sigma[j] = std::max(momentum * sigma[j] + (1.0 - momentum) * batch.std[j], eps);
    }
}

void ClusterHeadConfig::validate() const {
    if (clusters < 2) throw ConfigError("need at least 2 clusters");
    if (!(gamma > 1.0)) throw ConfigError("gamma must be > 1");
    if (batch_size < 2) throw ConfigError("batch size must be >= 2");
    const double scaled = normalized_score_bound(batch_size) / gamma;
    if (scaled > kMaxSigmoidInput) {
        throw ConfigError("gamma " + std::to_string(gamma) + " too small for batch size " +
                          std::to_string(batch_size) + ": normalized scores reach " + std::to_string(scaled) +
                          " at the sigmoid input (limit " + std::to_string(kMaxSigmoidInput) + ")");
    }
}

double normalized_score_bound(std::size_t n) {
    const double nd = static_cast<double>(n);
    return (nd - 1.0) / std::sqrt(nd);
}

Var normalize_relevance(Var relevance, RelevanceStats& stats, NormMode mode, bool update_running) {
    const Tensor& a = relevance.value();
    if (a.rank() != 2 || a.dim(1) != stats.clusters()) {
        throw DimensionError("relevance shape " + shape_string(a.shape()) + " does not match " +
                             std::to_string(stats.clusters()) + " clusters");
    }
    if (mode == NormMode::eval) return shift_scale_columns(relevance, stats.mu, stats.sigma);
    if (a.dim(0) < 2) throw ConfigError("train-mode normalization needs a batch of at least 2");
    ColumnMoments moments;
    Var out = standardize_columns(relevance, stats.eps, &moments);
    if (update_running) stats.update(moments);
    return out;
}

Tensor normalize_relevance(const Tensor& relevance, RelevanceStats& stats, NormMode mode) {
    Tape tape;
    return normalize_relevance(tape.constant_ref(relevance), stats, mode).value();
}

Tensor cluster_likelihoods(const Tensor& normalized, double gamma) {
    if (!(gamma > 1.0)) throw ConfigError("gamma must be > 1");
    Tensor z = normalized;
    for (auto& v : z.data()) v /= gamma;
    return sigmoid(z);
}

Var likelihood_logits(Var normalized, double gamma) {
    if (!(gamma > 1.0)) throw ConfigError("gamma must be > 1");
    return scale(normalized, 1.0 / gamma);
}

Tensor posteriors(const Tensor& normalized) { return softmax_rows(normalized); }

Tensor posteriors(const Tensor& normalized, std::span<const double> priors) {
    if (normalized.rank() != 2 || priors.size() != normalized.dim(1)) {
        throw DimensionError("posteriors: prior count does not match cluster count");
    }
    Tensor logits = normalized;
    for (std::size_t i = 0; i < logits.dim(0); ++i) {
        for (std::size_t j = 0; j < logits.dim(1); ++j) {
            if (!(priors[j] > 0.0)) throw NumericError("posteriors: priors must be positive");
            logits.at(i, j) += std::log(priors[j]);
        }
    }
    return softmax_rows(logits);
}

namespace {

void require_matching(const Tensor& p, const Tensor& h, const char* op) {
    if (p.shape() != h.shape() || p.rank() != 2) {
        throw DimensionError(std::string(op) + ": shapes " + shape_string(p.shape()) + " and " +
                             shape_string(h.shape()) + " differ");
    }
}

}  // namespace

double em_loss(const Tensor& p, const Tensor& h) {
    require_matching(p, h, "em_loss");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(h[i] > 0.0) || !std::isfinite(h[i])) throw NumericError("em_loss: likelihood must be positive");
        s += p[i] * std::log(h[i]);
    }
    return -s / static_cast<double>(p.dim(0));
}

Var em_loss(const Tensor& p, Var logits) {
    require_matching(p, logits.value(), "em_loss");
    return scale(weighted_sum(p, log_sigmoid(logits)), -1.0 / static_cast<double>(p.dim(0)));
}

double em_loss_augmented(const Tensor& p, const Tensor& h, const Tensor& h_tr) {
    return em_loss(p, h) + em_loss(p, h_tr);
}

Var em_loss_augmented(const Tensor& p, Var logits, Var logits_tr) {
    return add(em_loss(p, logits), em_loss(p, logits_tr));
}

double kl_consistency(const Tensor& p, const Tensor& q) {
    require_matching(p, q, "kl_consistency");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (!(q[i] > 0.0)) throw NumericError("kl_consistency: q must be positive where p is");
        s += p[i] * std::log(p[i] / q[i]);
    }
    // Gibbs' inequality; only rounding can push the sum below zero.
    return std::max(0.0, s / static_cast<double>(p.dim(0)));
}

Var kl_consistency(const Tensor& p, Var normalized_tr) {
    require_matching(p, normalized_tr.value(), "kl_consistency");
    const double n = static_cast<double>(p.dim(0));
    double entropy_term = 0.0;
    for (double v : p.data()) {
        if (v > 0.0) entropy_term += v * std::log(v);
    }
    Tape& tape = normalized_tr.tape();
    Var cross = scale(weighted_sum(p, log_softmax_rows(normalized_tr)), -1.0 / n);
    return add(cross, tape.constant(Tensor({1}, entropy_term / n)));
}

std::vector<double> column_means(const Tensor& m) {
    if (m.rank() != 2) throw DimensionError("column_means expects a matrix");
    std::vector<double> out(m.dim(1), 0.0);
    for (std::size_t i = 0; i < m.dim(0); ++i) {
        for (std::size_t j = 0; j < m.dim(1); ++j) out[j] += m.at(i, j);
    }
    for (auto& v : out) v /= static_cast<double>(m.dim(0));
    return out;
}

MonteCarloReport monte_carlo_check(const Tensor& likelihoods, double tolerance) {
    MonteCarloReport report;
    report.tolerance = tolerance;
    report.h_mean = column_means(likelihoods);
    for (std::size_t j = 0; j < report.h_mean.size(); ++j) {
        if (std::abs(report.h_mean[j] - 0.5) > tolerance) report.flagged.push_back(j);
    }
    return report;
}

std::vector<std::size_t> argmax_rows(const Tensor& m) {
    if (m.rank() != 2) throw DimensionError("argmax_rows expects a matrix");
    std::vector<std::size_t> out(m.dim(0), 0);
    for (std::size_t i = 0; i < m.dim(0); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < m.dim(1); ++j) {
            if (m.at(i, j) > m.at(i, best)) best = j;
        }
        out[i] = best;
    }
    return out;
}

}  // namespace neuromix
