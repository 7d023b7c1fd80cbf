#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuromix/augment.hpp"
#include "neuromix/data.hpp"

namespace neuromix::cli {

// Everything a run needs. Serialized as one flat JSON object; every key is
// also accepted as a command-line flag of the same name.
struct RunConfig {
    // data
    std::string data = "blobs";  // blobs | csv | idx
    std::string data_path;       // CSV file or IDX images
    std::string labels_path;     // IDX labels, optional
    std::size_t limit = 0;       // keep the first `limit` samples; 0 keeps all
    std::size_t blobs_clusters = 10;
    std::size_t blobs_points = 1000;
    double blobs_separation = 8.0;
    std::uint64_t blobs_seed = 0;
    bool sobel = true;        // images: Sobel edge channels as network input
    bool standardize = true;  // vectors: z-score each feature

    // model and optimization
    std::string arch = "F32 F32 F10";
    std::size_t clusters = 10;
    double gamma = 5.0;
    std::size_t batch_size = 128;
    std::size_t epochs = 10;
    double lr_em = 1e-3;
    double lr_kl = 1e-4;
    std::string mode = "em_only";  // em_only | two_fold
    bool normalize = true;
    bool posterior_priors = false;

    // augmentation (images only)
    bool augment = true;
    double aug_crop_min = 0.8;
    double aug_crop_max = 1.0;
    double aug_shift = 0.1;
    double aug_rotation = 15.0;
    double aug_scale_min = 0.9;
    double aug_scale_max = 1.1;
    double aug_brightness = 0.2;
    double aug_contrast = 0.2;

    std::uint64_t seed = 0;  // parameter initialization
    std::uint64_t shuffle_seed = 1;
    std::uint64_t augment_seed = 2;
    std::size_t eval_every = 1;
    std::string out = "out";

    bool two_fold() const { return mode == "two_fold"; }
    AugmentConfig augment_config() const;
    // Throws ConfigError on any inconsistent field.
    void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
// Unknown keys and wrongly typed values are ConfigErrors.
RunConfig run_config_from_json(const nlohmann::json& j);

// Keys of the flat JSON form, in declaration order.
std::vector<std::string> run_config_keys();

// Defaults, overlaid with the JSON file (if any), overlaid with flag values.
// Flag values are parsed as JSON scalars where the field is not a string.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::map<std::string, std::string>& overrides);
nlohmann::json apply_overrides(nlohmann::json base, const std::map<std::string, std::string>& overrides);

// Maps raw samples to network inputs: Sobel channels for images, per-feature
// standardization for vectors. Fitted once on the training data and stored
// with the checkpoint.
struct InputTransform {
    bool sobel = false;
    std::vector<double> mean;
    std::vector<double> scale;

    Dataset apply(const Dataset& raw) const;
    Tensor apply_vectors(const Tensor& points) const;
};

nlohmann::json to_json(const InputTransform& t);
InputTransform input_transform_from_json(const nlohmann::json& j);
InputTransform fit_input_transform(const RunConfig& config, const Dataset& raw);

// Raw dataset described by the config (before any input transform).
Dataset load_dataset(const RunConfig& config);

}  // namespace neuromix::cli
