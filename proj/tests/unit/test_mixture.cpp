#include <doctest.h>

#include <cmath>
#include <random>

#include "neuromix/error.hpp"
#include "neuromix/mixture.hpp"
#include "neuromix/session.hpp"
#include "support/oracles.hpp"

using namespace neuromix;
namespace nt = neuromix::testing;

namespace {

Tensor normalize_train(const Tensor& a, RelevanceStats* stats_out = nullptr) {
    RelevanceStats stats(a.dim(1));
    Tape t;
    Tensor out = normalize_relevance(t.constant(a), stats, NormMode::train).value();
    if (stats_out) *stats_out = stats;
    return out;
}

// Hand-rolled column standardization with the population std.
Tensor oracle_standardize(const Tensor& a) {
    const std::size_t n = a.dim(0), k = a.dim(1);
    Tensor out(a.shape());
    for (std::size_t j = 0; j < k; ++j) {
        double m = 0;
        for (std::size_t i = 0; i < n; ++i) m += a.at(i, j);
        m /= static_cast<double>(n);
        double v = 0;
        for (std::size_t i = 0; i < n; ++i) v += (a.at(i, j) - m) * (a.at(i, j) - m);
        const double s = std::max(std::sqrt(v / static_cast<double>(n)), 1e-5);
        for (std::size_t i = 0; i < n; ++i) out.at(i, j) = (a.at(i, j) - m) / s;
    }
    return out;
}

}  // namespace

TEST_CASE("normalize_relevance examples") {
    CHECK(normalize_train(Tensor::matrix({{0}, {2}})) == Tensor::matrix({{-1}, {1}}));
    CHECK(normalize_train(Tensor::matrix({{5}, {5}, {5}})) == Tensor::matrix({{0}, {0}, {0}}));
    CHECK_THROWS_AS(normalize_train(Tensor::matrix({{1, 2}})), ConfigError);

    // Eval mode accepts a single row and uses the running statistics.
    RelevanceStats stats(2);
    stats.mu = {1.0, -1.0};
    stats.sigma = {2.0, 0.5};
    Tensor e = normalize_relevance(Tensor::matrix({{3, 0}}), stats, NormMode::eval);
    CHECK(e == Tensor::matrix({{1, 2}}));
}

TEST_CASE("train-mode columns are standardized and match the oracle") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor a({128, 5}, nt::random_vector(640, rng, -50, 50));
        Tensor out = normalize_train(a);
        Tensor ref = oracle_standardize(a);
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::abs(out[i] - ref[i]) < 1e-12);
        for (std::size_t j = 0; j < 5; ++j) {
            double m = 0, v = 0;
            for (std::size_t i = 0; i < 128; ++i) m += out.at(i, j);
            m /= 128;
            for (std::size_t i = 0; i < 128; ++i) v += (out.at(i, j) - m) * (out.at(i, j) - m);
            CHECK(std::abs(m) < 1e-9);
            CHECK(std::abs(std::sqrt(v / 128) - 1.0) < 1e-6);
        }
        const double bound = normalized_score_bound(128);
        for (double v : out.data()) CHECK(std::abs(v) <= bound);
    }
}

// With the population std the extreme score is sqrt(n - 1), reached by a
// single outlier, which sits just above (n - 1) / sqrt(n).
TEST_CASE("single outlier reaches sqrt(n - 1)") {
    Tensor a({128, 1}, 0.0);
    a.at(17, 0) = 5.0;
    const Tensor out = normalize_train(a);
    CHECK(out.at(17, 0) == doctest::Approx(std::sqrt(127.0)).epsilon(1e-12));
    CHECK(out.at(17, 0) > normalized_score_bound(128));
    CHECK(out.at(17, 0) - normalized_score_bound(128) < 0.05);
}

TEST_CASE("running statistics follow the momentum rule") {
    RelevanceStats stats;
    normalize_train(Tensor::matrix({{0}, {2}}), &stats);
    CHECK(stats.mu[0] == doctest::Approx(0.1));
    CHECK(stats.sigma[0] == doctest::Approx(1.0));
    RelevanceStats flat;
    normalize_train(Tensor::matrix({{4}, {4}}), &flat);
    CHECK(flat.mu[0] == doctest::Approx(0.4));
    CHECK(flat.sigma[0] == doctest::Approx(0.9 + 0.1 * 1e-5));
    CHECK_THROWS_AS(RelevanceStats(2, 1.0), ConfigError);
}

TEST_CASE("cluster likelihoods and posteriors") {
    CHECK(cluster_likelihoods(Tensor::matrix({{0, 0}}), 5.0) == Tensor::matrix({{0.5, 0.5}}));
    CHECK(cluster_likelihoods(Tensor::matrix({{5}}), 5.0)[0] == doctest::Approx(0.7310585786300049).epsilon(1e-12));

    Tensor u = posteriors(Tensor::matrix({{2, 2, 2, 2}}));
    for (double v : u.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    Tensor p = posteriors(Tensor::matrix({{std::log(3.0), 0}}));
    CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-14));

    std::mt19937_64 rng(4);
    Tensor a({64, 7}, nt::random_vector(448, rng, -10, 10));
    Tensor post = posteriors(a);
    CHECK(argmax_rows(post) == argmax_rows(a));
    CHECK(argmax_rows(cluster_likelihoods(a, 5.0)) == argmax_rows(post));
    for (std::size_t i = 0; i < 64; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 7; ++j) s += post.at(i, j);
        CHECK(std::abs(s - 1.0) < 1e-6);
    }

    // Uniform priors reproduce the plain softmax; skewed priors shift mass.
    const std::vector<double> flat(7, 1.0 / 7.0);
    Tensor with_flat = posteriors(a, flat);
    for (std::size_t i = 0; i < post.size(); ++i) CHECK(with_flat[i] == doctest::Approx(post[i]).epsilon(1e-12));
    Tensor skew = posteriors(Tensor::matrix({{0, 0}}), std::vector<double>{0.75, 0.25});
    CHECK(skew[0] == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("argmax ties resolve to the lowest index") {
    CHECK(argmax_rows(Tensor::matrix({{1, 3, 3}, {2, 2, 2}})) == std::vector<std::size_t>{1, 0});
}

TEST_CASE("em_loss examples") {
    const Tensor p = Tensor::matrix({{1, 0}, {0, 1}});
    const Tensor h = Tensor::matrix({{0.7, 0.3}, {0.4, 0.6}});
    const double expected = -(std::log(0.7) + std::log(0.6)) / 2.0;
    CHECK(expected == doctest::Approx(0.4337502838523616).epsilon(1e-15));
    CHECK(em_loss(p, h) == doctest::Approx(expected).epsilon(1e-14));

    std::mt19937_64 rng(8);
    Tensor random_p({5, 3}, nt::random_simplex_rows(5, 3, rng));
    CHECK(em_loss(random_p, Tensor({5, 3}, 0.5)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(em_loss(Tensor::matrix({{0, 1}}), Tensor::matrix({{0.2, 1.0}})) == 0.0);
    CHECK_THROWS_AS(em_loss(p, Tensor::matrix({{0.7, 0.3}, {0.0, 0.6}})), NumericError);
    CHECK_THROWS_AS(em_loss(p, Tensor::matrix({{0.7, 0.3}})), DimensionError);

    // The Var form takes logits; log(sigmoid) is stable for large negative input.
    Tape t;
    Tensor logits = Tensor::matrix({{std::log(0.7 / 0.3), 0}, {0, std::log(0.6 / 0.4)}});
    CHECK(em_loss(p, t.constant(logits)).value()[0] == doctest::Approx(expected).epsilon(1e-13));
    const double far = em_loss(Tensor::matrix({{1.0}}), t.constant(Tensor::matrix({{-800.0}}))).value()[0];
    CHECK(far == doctest::Approx(800.0));
}

TEST_CASE("em_loss_augmented examples") {
    const Tensor p = Tensor::matrix({{1, 0}, {0, 1}});
    const Tensor h = Tensor::matrix({{0.7, 0.3}, {0.4, 0.6}});
    const Tensor half({2, 2}, 0.5);
    CHECK(em_loss_augmented(p, h, h) == 2.0 * em_loss(p, h));
    CHECK(em_loss_augmented(p, half, half) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(em_loss_augmented(p, h, half) == doctest::Approx(0.4337502838523616 + std::log(2.0)).epsilon(1e-14));

    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor pp({6, 4}, nt::random_simplex_rows(6, 4, rng));
        Tensor z({6, 4}, nt::random_vector(24, rng, -3, 3));
        Tape t;
        Var a = t.constant(z);
        CHECK(em_loss_augmented(pp, a, a).value()[0] == 2.0 * em_loss(pp, a).value()[0]);
    }
}

TEST_CASE("kl_consistency examples and properties") {
    CHECK(kl_consistency(Tensor::matrix({{1, 0}}), Tensor::matrix({{0.5, 0.5}})) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        Tensor p({4, 5}, nt::random_simplex_rows(4, 5, rng));
        Tensor q({4, 5}, nt::random_simplex_rows(4, 5, rng));
        CHECK(kl_consistency(p, q) >= 0.0);
        CHECK(kl_consistency(p, p) == 0.0);
    }
    CHECK_THROWS_AS(kl_consistency(Tensor::matrix({{0.5, 0.5}}), Tensor::matrix({{1, 0}})), NumericError);

    // The Var form agrees with the value form on softmax(a_tr).
    Tensor p({3, 4}, nt::random_simplex_rows(3, 4, rng));
    Tensor a_tr({3, 4}, nt::random_vector(12, rng, -2, 2));
    Tape t;
    CHECK(kl_consistency(p, t.constant(a_tr)).value()[0] ==
          doctest::Approx(kl_consistency(p, softmax_rows(a_tr))).epsilon(1e-12));
    // Identical inputs give zero.
    Tensor same = softmax_rows(a_tr);
    CHECK(std::abs(kl_consistency(same, t.constant(a_tr)).value()[0]) < 1e-12);
}

TEST_CASE("EM and KL loss gradients match finite differences") {
    std::mt19937_64 rng(31);
    Tensor p({6, 3}, nt::random_simplex_rows(6, 3, rng));
    Tensor z0({6, 3}, nt::random_vector(18, rng, -2, 2));

    auto check = [&](const std::function<Var(Var)>& loss) {
        Tape tape;
        Var z = tape.input(z0);
        tape.backward(loss(z));
        Tensor g = tape.grad(z);
        auto f = [&](const std::vector<double>& v) {
            Tape t;
            return loss(t.constant(Tensor(z0.shape(), v))).value()[0];
        };
        auto num = nt::finite_difference(f, std::vector<double>(z0.data().begin(), z0.data().end()));
        for (std::size_t i = 0; i < num.size(); ++i) CHECK(nt::relative_error(g[i], num[i]) < 1e-4);
    };
    check([&](Var z) { return em_loss(p, likelihood_logits(standardize_columns(z, 1e-5), 5.0)); });
    check([&](Var z) { return kl_consistency(p, standardize_columns(z, 1e-5)); });
}

TEST_CASE("monte carlo check") {
    MonteCarloReport ok = monte_carlo_check(Tensor({10, 3}, 0.5));
    CHECK(ok.ok());
    CHECK(ok.h_mean == std::vector<double>{0.5, 0.5, 0.5});
    MonteCarloReport bad = monte_carlo_check(Tensor::matrix({{0.9, 0.5}, {0.95, 0.51}}));
    CHECK(bad.flagged == std::vector<std::size_t>{0});

    // Standardized columns pushed through sigmoid(a / 5) average near 0.5.
    std::mt19937_64 rng(2);
    Tensor a({128, 10}, nt::random_vector(1280, rng, -5, 5));
    CHECK(monte_carlo_check(cluster_likelihoods(normalize_train(a), 5.0)).ok());
}

TEST_CASE("head configuration validation") {
    ClusterHeadConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(normalized_score_bound(128) == doctest::Approx(11.225320151336442).epsilon(1e-14));
    cfg.gamma = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.gamma = 4.0;  // 11.225 / 4 = 2.81 > 2.31
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.clusters = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.batch_size = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("session steps") {
    const ArchSpec arch = parse_arch("F8 F3", {2});
    std::mt19937_64 rng(40);
    Tensor batch({16, 2}, nt::random_vector(32, rng, -3, 3));
    SessionConfig cfg;
    cfg.head.clusters = 3;
    cfg.head.batch_size = 16;

    SUBCASE("zero learning rate leaves parameters unchanged") {
        Model model = Model::build(arch, 1);
        Model before = model;
        ClusterSession s(model, cfg, AdamConfig{.lr = 0.0});
        s.em_step(batch);
        for (std::size_t i = 0; i < model.layers().size(); ++i) {
            const auto a = parameters(model.layers()[i]);
            const auto b = parameters(before.layers()[i]);
            for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k]->value == b[k]->value);
        }
    }
    SUBCASE("report fields") {
        Model model = Model::build(arch, 1);
        ClusterSession s(model, cfg, AdamConfig{.lr = 1e-3});
        StepReport r = s.em_step(batch);
        CHECK(r.assignments.size() == 16);
        CHECK(r.h_mean.size() == 3);
        for (double h : r.h_mean) CHECK(std::abs(h - 0.5) < 0.05);
        CHECK(std::isfinite(r.loss_em));
        CHECK(r.loss_kl == 0.0);
        CHECK(s.em_optimizer().steps() == 1);
        CHECK(s.assign(Tensor::matrix({{0.1, 0.2}})).size() == 1);
    }
    SUBCASE("cluster count must match the model") {
        Model model = Model::build(arch, 1);
        cfg.head.clusters = 4;
        CHECK_THROWS_AS(ClusterSession(model, cfg), ConfigError);
    }
    SUBCASE("a zero KL learning rate reduces two_fold to the EM fold") {
        Model a = Model::build(arch, 7), b = Model::build(arch, 7);
        ClusterSession sa(a, cfg, AdamConfig{.lr = 1e-2}, AdamConfig{.lr = 0.0});
        ClusterSession sb(b, cfg, AdamConfig{.lr = 1e-2});
        Tensor tr = batch;
        for (auto& v : tr.data()) v *= 1.1;
        for (int step = 0; step < 5; ++step) {
            StepReport ra = sa.two_fold_step(batch, tr);
            StepReport rb = sb.em_step(batch, tr);
            CHECK(ra.loss_em == rb.loss_em);
            CHECK(ra.loss_kl >= 0.0);
        }
        CHECK(a.forward_relevance(batch) == b.forward_relevance(batch));
        CHECK(sa.stats().mu == sb.stats().mu);
    }
    SUBCASE("posterior priors follow previous batches") {
        Model model = Model::build(arch, 3);
        cfg.posterior_priors = true;
        ClusterSession s(model, cfg, AdamConfig{.lr = 1e-3});
        s.em_step(batch);
        double total = 0;
        for (double v : s.priors()) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("no gradient reaches the model through the posterior path") {
    // Only the detached posterior is connected to the loss here.
    Model model = Model::build(parse_arch("F4 F3", {2}), 5);
    Tape tape;
    Var a = model.forward(tape, tape.constant(Tensor::matrix({{1, 2}, {3, -1}, {0, 0.5}})));
    Tensor p = posteriors(a.value());
    Var probe = weighted_sum(p, tape.constant(Tensor({3, 3}, 1.0)));
    model.zero_grad();
    tape.backward(add(probe, scale(sum(detach(a)), 0.0)));
    for (Parameter* prm : model.parameters())
        for (double g : prm->grad.data()) CHECK(g == 0.0);
}
