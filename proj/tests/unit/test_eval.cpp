#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "neuromix/baselines.hpp"
#include "neuromix/data.hpp"
#include "neuromix/error.hpp"
#include "neuromix/metrics.hpp"
#include "support/oracles.hpp"

using namespace neuromix;
namespace nt = neuromix::testing;

namespace {

std::vector<std::vector<double>> random_cost(std::size_t k, std::mt19937_64& rng, bool integer = false) {
    std::vector<std::vector<double>> c(k, std::vector<double>(k));
    std::uniform_int_distribution<int> small(0, 3);
    std::uniform_real_distribution<double> u(-10, 10);
    for (auto& row : c)
        for (auto& v : row) v = integer ? small(rng) : u(rng);
    return c;
}

double cost_of(const std::vector<std::vector<double>>& c, const std::vector<std::size_t>& perm) {
    double s = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += c[i][perm[i]];
    return s;
}

// Lexicographically smallest optimal permutation by enumeration.
std::vector<std::size_t> brute_force_lex(const std::vector<std::vector<double>>& c) {
    std::vector<std::size_t> perm(c.size()), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        const double v = cost_of(c, perm);
        if (v < best_cost - 1e-9) {
            best_cost = v;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Hand NMI with arithmetic-mean normalization.
double oracle_nmi(const std::vector<std::size_t>& a, const std::vector<int>& b) {
    const double n = static_cast<double>(a.size());
    std::map<std::pair<std::size_t, int>, double> joint;
    std::map<std::size_t, double> pa;
    std::map<int, double> pb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        pa[a[i]] += 1;
        pb[b[i]] += 1;
    }
    double mi = 0, ha = 0, hb = 0;
    for (auto& [key, c] : joint) mi += c / n * std::log(c * n / (pa[key.first] * pb[key.second]));
    for (auto& [k, c] : pa) ha -= c / n * std::log(c / n);
    for (auto& [k, c] : pb) hb -= c / n * std::log(c / n);
    if (ha == 0 && hb == 0) return 1.0;
    return mi / ((ha + hb) / 2);
}

}  // namespace

TEST_CASE("hungarian examples") {
    Assignment id = hungarian({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    CHECK(id.permutation == std::vector<std::size_t>{0, 1, 2});
    CHECK(id.cost == 0.0);

    Assignment two = hungarian({{4, 1}, {2, 3}});
    CHECK(two.permutation == std::vector<std::size_t>{1, 0});
    CHECK(two.cost == 3.0);

    // All-equal costs: every permutation is optimal, the identity is smallest.
    CHECK(hungarian({{2, 2}, {2, 2}}).permutation == std::vector<std::size_t>{0, 1});

    CHECK_THROWS_AS(hungarian({{1, 2}}), DimensionError);
    CHECK_THROWS_AS(hungarian({{1, std::nan("")}, {0, 1}}), NumericError);
    CHECK(hungarian({}).permutation.empty());
}

TEST_CASE("hungarian matches brute force") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 30; ++trial) {
        auto c = random_cost(6, rng);
        std::vector<std::size_t> bf_perm;
        const double bf = nt::brute_force_assignment(c, &bf_perm);
        Assignment a = hungarian(c);
        CHECK(a.cost == doctest::Approx(bf).epsilon(1e-12));
        CHECK(cost_of(c, a.permutation) == doctest::Approx(bf).epsilon(1e-12));

        // Constant shifts do not move the argmin.
        auto shifted = c;
        for (auto& row : shifted)
            for (auto& v : row) v += 17.0;
        CHECK(hungarian(shifted).permutation == a.permutation);
    }
    // Heavy ties: lexicographic tie-breaking matches enumeration.
    for (int trial = 0; trial < 50; ++trial) {
        auto c = random_cost(5, rng, true);
        CHECK(hungarian(c).permutation == brute_force_lex(c));
    }
}

TEST_CASE("unsupervised accuracy") {
    const std::vector<int> truth{0, 0, 1, 1, 2, 2};
    CHECK(unsupervised_accuracy({0, 0, 1, 1, 2, 2}, truth) == 1.0);
    CHECK(unsupervised_accuracy({2, 2, 0, 0, 1, 1}, truth) == 1.0);
    CHECK(unsupervised_accuracy({0, 0, 0, 1, 1, 1}, truth) == doctest::Approx(4.0 / 6.0));
    CHECK(match_clusters({2, 2, 0, 0, 1, 1}, truth) == std::vector<int>{1, 2, 0});

    std::vector<int> ten(1000);
    for (std::size_t i = 0; i < ten.size(); ++i) ten[i] = static_cast<int>(i % 10);
    CHECK(unsupervised_accuracy(std::vector<std::size_t>(1000, 3), ten) == doctest::Approx(0.1));
    CHECK_THROWS_AS(unsupervised_accuracy({0, 1}, {0}), DimensionError);

    // Invariant under relabeling either side.
    std::mt19937_64 rng(4);
    std::vector<std::size_t> pred(200);
    std::vector<int> t(200);
    for (std::size_t i = 0; i < 200; ++i) {
        pred[i] = rng() % 5;
        t[i] = static_cast<int>(rng() % 5);
    }
    std::vector<std::size_t> relabel{3, 0, 4, 1, 2};
    std::vector<std::size_t> pred2(200);
    std::vector<int> t2(200);
    for (std::size_t i = 0; i < 200; ++i) {
        pred2[i] = relabel[pred[i]];
        t2[i] = static_cast<int>(relabel[static_cast<std::size_t>(t[i])]);
    }
    const double base = unsupervised_accuracy(pred, t);
    CHECK(unsupervised_accuracy(pred2, t) == base);
    CHECK(unsupervised_accuracy(pred, t2) == base);
}

TEST_CASE("nmi") {
    const std::vector<int> truth{0, 0, 1, 1, 2, 2};
    CHECK(nmi({0, 0, 1, 1, 2, 2}, truth) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nmi({5, 5, 5, 5, 5, 5}, truth) == 0.0);
    CHECK(nmi({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(nmi({0, 0, 0}, {1, 1, 1}) == 1.0);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::size_t> a(100);
        std::vector<int> b(100);
        for (std::size_t i = 0; i < 100; ++i) {
            a[i] = rng() % 4;
            b[i] = static_cast<int>((a[i] + (rng() % 3 == 0 ? rng() % 4 : 0)) % 4);
        }
        const double v = nmi(a, b);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v == doctest::Approx(oracle_nmi(a, b)).epsilon(1e-12));
        std::vector<std::size_t> b_as_pred(b.begin(), b.end());
        std::vector<int> a_as_truth(a.begin(), a.end());
        CHECK(nmi(b_as_pred, a_as_truth) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("contingency and report") {
    ContingencyTable t = contingency({0, 0, 1, 2}, {1, 1, 0, 0});
    CHECK(t.total == 4);
    CHECK(t.counts[0][1] == 2);
    CHECK(t.counts[2][0] == 1);

    EvalReport r = evaluate_assignments({0, 0, 0, 1}, 4, std::vector<int>{0, 0, 1, 1});
    CHECK(r.occupancy == std::vector<double>{0.75, 0.25, 0.0, 0.0});
    CHECK(r.occupied_clusters() == 2);
    CHECK(r.collapsed());
    CHECK(*r.accuracy == doctest::Approx(0.75));
    auto j = to_json(r);
    CHECK(j["accuracy"].get<double>() == doctest::Approx(0.75));
    CHECK(j["collapsed"].get<bool>());

    EvalReport unlabeled = evaluate_assignments({0, 1, 2}, 3, std::nullopt);
    CHECK_FALSE(unlabeled.accuracy.has_value());
    CHECK_FALSE(unlabeled.collapsed());
}

TEST_CASE("kmeans") {
    Dataset two = make_blobs(2, 200, 10.0, 5);
    KMeansResult r = kmeans(two.samples, 2, 1);
    CHECK(unsupervised_accuracy(r.assignments, *two.labels) == 1.0);
    CHECK(kmeans(two.samples, 2, 1).assignments == r.assignments);

    KMeansResult one = kmeans(two.samples, 1, 0);
    for (std::size_t d = 0; d < 2; ++d) {
        double m = 0;
        for (std::size_t i = 0; i < two.size(); ++i) m += two.samples.at(i, d);
        CHECK(one.centroids.at(0, d) == doctest::Approx(m / 400.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(kmeans(Tensor::matrix({{0, 0}, {1, 1}}), 3, 0), ConfigError);
}

TEST_CASE("gmm_em") {
    Dataset two = make_blobs(2, 200, 10.0, 9);
    GmmResult g = gmm_em(two.samples, 2, 1);
    CHECK(unsupervised_accuracy(g.assignments, *two.labels) == 1.0);
    for (double v : g.variances.data()) CHECK(v >= kGmmVarianceFloor);

    GmmResult one = gmm_em(two.samples, 1, 0);
    for (std::size_t d = 0; d < 2; ++d) {
        double m = 0, v = 0;
        for (std::size_t i = 0; i < 400; ++i) m += two.samples.at(i, d);
        m /= 400;
        for (std::size_t i = 0; i < 400; ++i) v += std::pow(two.samples.at(i, d) - m, 2);
        CHECK(one.means.at(0, d) == doctest::Approx(m).epsilon(1e-9));
        CHECK(one.variances.at(0, d) == doctest::Approx(v / 400).epsilon(1e-9));
    }

    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor pts({60, 3}, nt::random_vector(180, rng, -5, 5));
        GmmResult r = gmm_em(pts, 4, static_cast<std::uint64_t>(trial));
        for (std::size_t i = 1; i < r.log_likelihood.size(); ++i)
            CHECK(r.log_likelihood[i] >= r.log_likelihood[i - 1] - 1e-8);
    }

    // Duplicate points push variances to the floor without failing.
    Tensor dup({6, 2}, std::vector<double>{0, 0, 0, 0, 0, 0, 5, 5, 5, 5, 5, 5});
    GmmResult tight = gmm_em(dup, 2, 0);
    for (double v : tight.variances.data()) CHECK(v == doctest::Approx(kGmmVarianceFloor));
    CHECK_THROWS_AS(gmm_em(dup, 7, 0), ConfigError);
}
