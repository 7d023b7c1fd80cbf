#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

namespace neuromix {

struct Assignment {
    std::vector<std::size_t> permutation;  // row i -> column permutation[i]
    double cost = 0.0;
};

// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
// potentials). Among optimal matchings the lexicographically smallest
// permutation is returned, which costs O(K^5) in the worst case.
Assignment hungarian(const std::vector<std::vector<double>>& cost);

// counts[p][t]: samples predicted p with true label t.
struct ContingencyTable {
    std::vector<std::vector<std::size_t>> counts;
    std::size_t total = 0;

    std::size_t predicted_clusters() const { return counts.size(); }
    std::size_t true_classes() const { return counts.empty() ? 0 : counts[0].size(); }
};

ContingencyTable contingency(const std::vector<std::size_t>& pred, const std::vector<int>& truth,
                             std::size_t pred_clusters = 0, std::size_t true_classes = 0);
void write_contingency_csv(const std::filesystem::path& path, const ContingencyTable& table);

// Best accuracy over one-to-one matchings of predicted clusters to labels.
double unsupervised_accuracy(const std::vector<std::size_t>& pred, const std::vector<int>& truth);
// Matching used by unsupervised_accuracy: cluster -> label (or -1 if the
// cluster index exceeds the label range).
std::vector<int> match_clusters(const std::vector<std::size_t>& pred, const std::vector<int>& truth);

// Mutual information normalized by the arithmetic mean of the two entropies.
// Two single-cluster partitions score 1.
double nmi(const std::vector<std::size_t>& pred, const std::vector<int>& truth);

struct EvalReport {
    std::optional<double> accuracy;
    std::optional<double> nmi;
    std::vector<double> occupancy;  // fraction of samples per predicted cluster
    std::vector<int> matching;      // cluster -> matched label, when labels exist
    std::vector<double> h_mean;     // per-cluster mean likelihood, when provided
    std::size_t samples = 0;

    std::size_t occupied_clusters() const;
    std::size_t empty_clusters() const { return occupancy.size() - occupied_clusters(); }
    // More than half of the clusters received no samples.
    bool collapsed() const { return occupied_clusters() * 2 <= occupancy.size(); }
};

EvalReport evaluate_assignments(const std::vector<std::size_t>& pred, std::size_t clusters,
                                const std::optional<std::vector<int>>& truth);

nlohmann::json to_json(const EvalReport& report);

}  // namespace neuromix
