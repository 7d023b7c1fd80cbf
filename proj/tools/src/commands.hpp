#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuromix/checkpoint.hpp"
#include "neuromix/metrics.hpp"
#include "run_config.hpp"

namespace neuromix::cli {

struct TrainResult {
    EvalReport report;
    nlohmann::json report_json;
    std::filesystem::path checkpoint;
};

// Writes <out>/config.json, metrics.jsonl, checkpoint.json and report.json.
// Progress lines go to `log` when given.
TrainResult train(const RunConfig& config, std::ostream* log = nullptr);

// A checkpoint together with the run configuration and input transform it
// was trained with.
struct LoadedRun {
    Checkpoint checkpoint;
    RunConfig config;
    InputTransform transform;
};

LoadedRun load_run(const std::filesystem::path& checkpoint);
nlohmann::json checkpoint_metadata(const RunConfig& config, const InputTransform& transform);

// Eval-mode cluster assignment over a whole dataset in batches of
// `batch_size`; h_mean is the eval-mode mean likelihood per cluster.
EvalReport evaluate_model(const Model& model, const RelevanceStats& stats, const RunConfig& config,
                          const Dataset& inputs, std::size_t batch_size);

// Rows (x, y, h_1..h_K) on a grid x grid lattice over the given box, in
// the raw (untransformed) input coordinates.
struct GridBox {
    double xmin, xmax, ymin, ymax;
};
GridBox data_box(const Dataset& raw, double margin = 0.1);
void export_contours(const LoadedRun& run, std::size_t grid, const GridBox& box, const std::filesystem::path& out);

// N rows of eval-mode normalized relevances a*_1..a*_K.
void export_responses(const LoadedRun& run, const Dataset& inputs, const std::filesystem::path& out,
                      std::size_t batch_size);

struct ActivationTarget {
    enum class Kind { neuron, filter };
    Kind kind = Kind::neuron;
    std::size_t layer = 0;  // conv layer ordinal, for filters
    std::size_t index = 0;  // cluster neuron or filter

    std::string str() const;
};

// "neuron:J" or "filter:L:F".
ActivationTarget parse_target(const std::string& text);

struct ActivationResult {
    Tensor input;                // (1, input_shape...)
    std::vector<double> trace;   // target activation before each step, then the final value
};

// Gradient ascent on a seeded uniform input. A neuron's activation is its
// raw relevance score; a filter's is the spatial mean of its conv output
// before the ReLU.
ActivationResult activation_maximize(const Model& model, const ActivationTarget& target, std::size_t steps, double lr,
                                     std::uint64_t seed);
nlohmann::json to_json(const ActivationResult& result, const ActivationTarget& target, std::size_t steps, double lr,
                       std::uint64_t seed);

std::string format_number(double v);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace neuromix::cli
