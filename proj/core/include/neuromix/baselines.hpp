#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "neuromix/tensor.hpp"

namespace neuromix {

struct KMeansResult {
    std::vector<std::size_t> assignments;
    Tensor centroids;  // (K, d)
    double inertia = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Lloyd iterations from a k-means++ seeding; points is (N, d).
KMeansResult kmeans(const Tensor& points, std::size_t clusters, std::uint64_t seed, std::size_t max_iter = 300);

struct GmmResult {
    std::vector<std::size_t> assignments;  // argmax posterior
    std::vector<double> weights;           // K
    Tensor means;                          // (K, d)
    Tensor variances;                      // (K, d), diagonal, >= variance_floor
    // Data log-likelihood under the parameters entering each iteration,
    // followed by the final value.
    std::vector<double> log_likelihood;
    bool converged = false;
};

inline constexpr double kGmmVarianceFloor = 1e-6;

// Diagonal-covariance Gaussian mixture fitted by EM, initialized from k-means.
GmmResult gmm_em(const Tensor& points, std::size_t clusters, std::uint64_t seed, std::size_t max_iter = 200,
                 double tol = 1e-10);

}  // namespace neuromix
