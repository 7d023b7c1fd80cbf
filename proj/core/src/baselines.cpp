#include "neuromix/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "neuromix/error.hpp"

namespace neuromix {

namespace {

void check_points(const Tensor& points, std::size_t clusters) {
    if (points.rank() != 2) throw DimensionError("clustering baselines expect (N, d) points");
    if (clusters == 0) throw ConfigError("need at least one cluster");
    if (clusters > points.dim(0)) {
        throw ConfigError("cluster count " + std::to_string(clusters) + " exceeds sample count " +
                          std::to_string(points.dim(0)));
    }
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

Tensor kmeanspp(const Tensor& x, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = x.dim(0), d = x.dim(1);
    Tensor c({k, d});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t first = static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
    first = std::min(first, n - 1);
    std::copy(x.row(first).begin(), x.row(first).end(), c.row(0).begin());
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = sq_dist(x.row(i), c.row(0));
    for (std::size_t j = 1; j < k; ++j) {
        double total = 0.0;
        for (double v : dist) total += v;
        std::size_t pick = n - 1;
        if (total > 0.0) {
            double r = unit(rng) * total;
            for (std::size_t i = 0; i < n; ++i) {
                r -= dist[i];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(unit(rng) * static_cast<double>(n)) % n;
        }
        std::copy(x.row(pick).begin(), x.row(pick).end(), c.row(j).begin());
        for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], sq_dist(x.row(i), c.row(j)));
    }
    return c;
}

}  // namespace

KMeansResult kmeans(const Tensor& points, std::size_t clusters, std::uint64_t seed, std::size_t max_iter) {
    check_points(points, clusters);
    const std::size_t n = points.dim(0), d = points.dim(1);
    std::mt19937_64 rng(seed);
    KMeansResult r;
    r.centroids = kmeanspp(points, clusters, rng);
    r.assignments.assign(n, 0);

    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
        bool changed = r.iterations == 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < clusters; ++j) {
                const double dj = sq_dist(points.row(i), r.centroids.row(j));
                if (dj < best_d) {
                    best_d = dj;
                    best = j;
                }
            }
            if (best != r.assignments[i]) changed = true;
            r.assignments[i] = best;
        }
        if (!changed) {
            r.converged = true;
            break;
        }
        Tensor sums({clusters, d});
        std::vector<std::size_t> counts(clusters, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto s = sums.row(r.assignments[i]);
            auto p = points.row(i);
            for (std::size_t c = 0; c < d; ++c) s[c] += p[c];
            ++counts[r.assignments[i]];
        }
        for (std::size_t j = 0; j < clusters; ++j) {
            if (counts[j] == 0) {
                // Re-seed an empty cluster at the point farthest from its centroid.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double di = sq_dist(points.row(i), r.centroids.row(r.assignments[i]));
                    if (di > far_d) {
                        far_d = di;
                        far = i;
                    }
                }
                std::copy(points.row(far).begin(), points.row(far).end(), r.centroids.row(j).begin());
                continue;
            }
            auto c = r.centroids.row(j);
            auto s = sums.row(j);
            for (std::size_t k = 0; k < d; ++k) c[k] = s[k] / static_cast<double>(counts[j]);
        }
    }
    r.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) r.inertia += sq_dist(points.row(i), r.centroids.row(r.assignments[i]));
    return r;
}

GmmResult gmm_em(const Tensor& points, std::size_t clusters, std::uint64_t seed, std::size_t max_iter, double tol) {
    check_points(points, clusters);
    const std::size_t n = points.dim(0), d = points.dim(1), k = clusters;
    const double log_2pi = std::log(2.0 * std::numbers::pi);

    GmmResult g;
    {
        const KMeansResult km = kmeans(points, k, seed, 50);
        g.means = km.centroids;
        g.variances = Tensor({k, d});
        g.weights.assign(k, 0.0);
        std::vector<double> counts(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = km.assignments[i];
            counts[j] += 1.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = points.at(i, c) - g.means.at(j, c);
                g.variances.at(j, c) += diff * diff;
            }
        }
        for (std::size_t j = 0; j < k; ++j) {
            g.weights[j] = std::max(counts[j], 1.0) / static_cast<double>(n);
            for (std::size_t c = 0; c < d; ++c) {
                g.variances.at(j, c) = std::max(g.variances.at(j, c) / std::max(counts[j], 1.0), kGmmVarianceFloor);
            }
        }
        double wsum = 0.0;
        for (double w : g.weights) wsum += w;
        for (auto& w : g.weights) w /= wsum;
    }

    Tensor resp({n, k});
    auto e_step = [&]() {
        double ll = 0.0;
        std::vector<double> logp(k);
        for (std::size_t i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                double lp = g.weights[j] > 0.0 ? std::log(g.weights[j]) : -std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < d; ++c) {
                    const double var = g.variances.at(j, c);
                    const double diff = points.at(i, c) - g.means.at(j, c);
                    lp -= 0.5 * (log_2pi + std::log(var) + diff * diff / var);
                }
                logp[j] = lp;
                mx = std::max(mx, lp);
            }
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += std::exp(logp[j] - mx);
            const double lse = mx + std::log(s);
            ll += lse;
            for (std::size_t j = 0; j < k; ++j) resp.at(i, j) = std::exp(logp[j] - lse);
        }
        return ll;
    };

    double prev = e_step();
    g.log_likelihood.push_back(prev);
    for (std::size_t it = 0; it < max_iter; ++it) {
        for (std::size_t j = 0; j < k; ++j) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) nk += resp.at(i, j);
            g.weights[j] = nk / static_cast<double>(n);
            // A component with no responsibility keeps its shape parameters;
            // its weight is (numerically) zero either way.
            if (nk < 1e-12) continue;
            for (std::size_t c = 0; c < d; ++c) {
                double m = 0.0;
                for (std::size_t i = 0; i < n; ++i) m += resp.at(i, j) * points.at(i, c);
                m /= nk;
                double v = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double diff = points.at(i, c) - m;
                    v += resp.at(i, j) * diff * diff;
                }
                g.means.at(j, c) = m;
                g.variances.at(j, c) = std::max(v / nk, kGmmVarianceFloor);
            }
        }
        const double ll = e_step();
        g.log_likelihood.push_back(ll);
        if (std::abs(ll - prev) <= tol * std::max(1.0, std::abs(ll))) {
            g.converged = true;
            break;
        }
        prev = ll;
    }
    g.assignments.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j) {
            if (resp.at(i, j) > resp.at(i, best)) best = j;
        }
        g.assignments[i] = best;
    }
    return g;
}

}  // namespace neuromix
