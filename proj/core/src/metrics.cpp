#include "neuromix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "neuromix/error.hpp"

namespace neuromix {

namespace {

// Rows `rows` matched to columns `cols` of `cost`; returns the optimal
// cost and writes row -> column (indices into `cols`) into `match`.
double solve_assignment(const std::vector<std::vector<double>>& cost, const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& cols, std::vector<std::size_t>* match) {
    const std::size_t n = rows.size();
    if (n == 0) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based arrays as in the classical formulation.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    auto c = [&](std::size_t i, std::size_t j) { return cost[rows[i - 1]][cols[j - 1]]; };
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[rows[i]][cols[row_to_col[i]]];
    if (match) *match = std::move(row_to_col);
    return total;
}

}  // namespace

Assignment hungarian(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    for (const auto& row : cost) {
        if (row.size() != n) throw DimensionError("hungarian: cost matrix must be square");
        for (double v : row) {
            if (!std::isfinite(v)) throw NumericError("hungarian: cost entries must be finite");
        }
    }
    Assignment result;
    if (n == 0) return result;

    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    std::vector<std::size_t> match;
    const double best = solve_assignment(cost, all, all, &match);
    double scale = 1.0;
    for (const auto& row : cost) {
        for (double v : row) scale = std::max(scale, std::abs(v));
    }
    const double tol = 1e-9 * scale * static_cast<double>(n);

    // Fix rows in order to the smallest column that still admits an optimum.
    result.permutation.assign(n, 0);
    std::vector<std::size_t> free_cols = all;
    double fixed_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> rest_rows(all.begin() + static_cast<long>(i) + 1, all.end());
        for (std::size_t k = 0; k < free_cols.size(); ++k) {
            const std::size_t col = free_cols[k];
            std::vector<std::size_t> rest_cols = free_cols;
            rest_cols.erase(rest_cols.begin() + static_cast<long>(k));
            const double total = fixed_cost + cost[i][col] + solve_assignment(cost, rest_rows, rest_cols, nullptr);
            if (total <= best + tol) {
                result.permutation[i] = col;
                fixed_cost += cost[i][col];
                free_cols = std::move(rest_cols);
                break;
            }
        }
    }
    result.cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) result.cost += cost[i][result.permutation[i]];
    return result;
}

ContingencyTable contingency(const std::vector<std::size_t>& pred, const std::vector<int>& truth,
                             std::size_t pred_clusters, std::size_t true_classes) {
    if (pred.size() != truth.size()) {
        throw DimensionError("prediction count " + std::to_string(pred.size()) + " does not match label count " +
                             std::to_string(truth.size()));
    }
    for (std::size_t p : pred) pred_clusters = std::max(pred_clusters, p + 1);
    for (int t : truth) {
        if (t < 0) throw DataError("labels must be non-negative");
        true_classes = std::max(true_classes, static_cast<std::size_t>(t) + 1);
    }
    ContingencyTable table;
    table.counts.assign(pred_clusters, std::vector<std::size_t>(true_classes, 0));
    for (std::size_t i = 0; i < pred.size(); ++i) ++table.counts[pred[i]][static_cast<std::size_t>(truth[i])];
    table.total = pred.size();
    return table;
}

void write_contingency_csv(const std::filesystem::path& path, const ContingencyTable& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "cluster";
    for (std::size_t t = 0; t < table.true_classes(); ++t) out << ",label_" << t;
    out << '\n';
    for (std::size_t p = 0; p < table.predicted_clusters(); ++p) {
        out << p;
        for (std::size_t c : table.counts[p]) out << ',' << c;
        out << '\n';
    }
}

std::vector<int> match_clusters(const std::vector<std::size_t>& pred, const std::vector<int>& truth) {
    const ContingencyTable table = contingency(pred, truth);
    const std::size_t k = std::max(table.predicted_clusters(), table.true_classes());
    std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
    for (std::size_t p = 0; p < table.predicted_clusters(); ++p) {
        for (std::size_t t = 0; t < table.true_classes(); ++t) cost[p][t] = -static_cast<double>(table.counts[p][t]);
    }
    const Assignment a = hungarian(cost);
    std::vector<int> out(table.predicted_clusters(), -1);
    for (std::size_t p = 0; p < table.predicted_clusters(); ++p) {
        if (a.permutation[p] < table.true_classes()) out[p] = static_cast<int>(a.permutation[p]);
    }
    return out;
}

double unsupervised_accuracy(const std::vector<std::size_t>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw DimensionError("prediction and label counts differ");
    if (pred.empty()) throw DataError("accuracy of an empty assignment");
    const std::vector<int> m = match_clusters(pred, truth);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += m[pred[i]] == truth[i];
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double nmi(const std::vector<std::size_t>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw DimensionError("prediction and label counts differ");
    if (pred.empty()) throw DataError("NMI of an empty assignment");
    const ContingencyTable t = contingency(pred, truth);
    const double n = static_cast<double>(t.total);
    std::vector<double> rows(t.predicted_clusters(), 0.0), cols(t.true_classes(), 0.0);
    for (std::size_t p = 0; p < rows.size(); ++p) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            rows[p] += static_cast<double>(t.counts[p][c]);
            cols[c] += static_cast<double>(t.counts[p][c]);
        }
    }
    auto entropy = [n](const std::vector<double>& m) {
        double h = 0.0;
        for (double c : m) {
            if (c > 0) h -= (c / n) * std::log(c / n);
        }
        return h;
    };
    double mi = 0.0;
    for (std::size_t p = 0; p < rows.size(); ++p) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const double nij = static_cast<double>(t.counts[p][c]);
            if (nij > 0) mi += (nij / n) * std::log(nij * n / (rows[p] * cols[c]));
        }
    }
    const double hp = entropy(rows), ht = entropy(cols);
    if (hp + ht == 0.0) return 1.0;
    return std::clamp(2.0 * mi / (hp + ht), 0.0, 1.0);
}

std::size_t EvalReport::occupied_clusters() const {
    return static_cast<std::size_t>(std::count_if(occupancy.begin(), occupancy.end(), [](double v) { return v > 0; }));
}

EvalReport evaluate_assignments(const std::vector<std::size_t>& pred, std::size_t clusters,
                                const std::optional<std::vector<int>>& truth) {
    EvalReport r;
    r.samples = pred.size();
    r.occupancy.assign(clusters, 0.0);
    for (std::size_t p : pred) {
        if (p >= clusters) throw DimensionError("cluster index out of range");
        r.occupancy[p] += 1.0;
    }
    for (auto& v : r.occupancy) v /= static_cast<double>(std::max<std::size_t>(pred.size(), 1));
    if (truth) {
        r.accuracy = unsupervised_accuracy(pred, *truth);
        r.nmi = nmi(pred, *truth);
        r.matching = match_clusters(pred, *truth);
        r.matching.resize(clusters, -1);
    }
    return r;
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json j;
    j["samples"] = r.samples;
    j["accuracy"] = r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json(nullptr);
    j["nmi"] = r.nmi ? nlohmann::json(*r.nmi) : nlohmann::json(nullptr);
    j["occupancy"] = r.occupancy;
    j["occupied_clusters"] = r.occupied_clusters();
    j["empty_clusters"] = r.empty_clusters();
    j["collapsed"] = r.collapsed();
    j["matching"] = r.matching;
    j["h_mean"] = r.h_mean;
    return j;
}

}  // namespace neuromix
