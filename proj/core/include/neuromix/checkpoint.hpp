#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "neuromix/mixture.hpp"
#include "neuromix/model.hpp"

namespace neuromix {

inline constexpr std::string_view kCheckpointFormat = "neuromix-ckpt-v1";

struct Checkpoint {
    Model model;
    RelevanceStats stats;
    nlohmann::json config;  // the training configuration, stored verbatim
};

// JSON container: {"format", "arch", "input_shape", "layers": [{"kind",
// hyperparameters, "weight"/"bias": {"shape", "data"}}], "stats", "config"}.
nlohmann::json checkpoint_to_json(const Model& model, const RelevanceStats& stats, const nlohmann::json& config);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Model& model, const RelevanceStats& stats,
                     const nlohmann::json& config);
// Throws FormatError for unreadable, corrupted or foreign files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace neuromix
