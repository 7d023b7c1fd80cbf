#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "neuromix/error.hpp"
#include "neuromix/mixture.hpp"

namespace neuromix::cli {

#define NEUROMIX_RUN_CONFIG_FIELDS(X)                                                                          \
    X(data) X(data_path) X(labels_path) X(limit) X(blobs_clusters) X(blobs_points) X(blobs_separation)        \
    X(blobs_seed) X(sobel) X(standardize) X(arch) X(clusters) X(gamma) X(batch_size) X(epochs) X(lr_em)       \
    X(lr_kl) X(mode) X(normalize) X(posterior_priors) X(augment) X(aug_crop_min) X(aug_crop_max) X(aug_shift) \
    X(aug_rotation) X(aug_scale_min) X(aug_scale_max) X(aug_brightness) X(aug_contrast) X(seed)               \
    X(shuffle_seed) X(augment_seed) X(eval_every) X(out)

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j = nlohmann::json::object();
#define X(name) j[#name] = c.name;
    NEUROMIX_RUN_CONFIG_FIELDS(X)
#undef X
    return j;
}

std::vector<std::string> run_config_keys() {
    return {
#define X(name) #name,
        NEUROMIX_RUN_CONFIG_FIELDS(X)
#undef X
    };
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* name, T& field) {
    auto it = j.find(name);
    if (it == j.end()) return;
    const auto& v = *it;
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) {
        ok = v.is_boolean();
    } else if constexpr (std::is_same_v<T, std::string>) {
        ok = v.is_string();
    } else if constexpr (std::is_floating_point_v<T>) {
        ok = v.is_number();
    } else {
        ok = v.is_number_unsigned() || (v.is_number_integer() && v.template get<long long>() >= 0);
    }
    if (!ok) throw ConfigError(std::string("config field '") + name + "' has the wrong type: " + v.dump());
    field = v.template get<T>();
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const auto keys = run_config_keys();
    for (const auto& [key, value] : j.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown config field '" + key + "'");
    }
    RunConfig c;
#define X(name) read_field(j, #name, c.name);
    NEUROMIX_RUN_CONFIG_FIELDS(X)
#undef X
    return c;
}

nlohmann::json apply_overrides(nlohmann::json base, const std::map<std::string, std::string>& overrides) {
    const nlohmann::json defaults = to_json(RunConfig{});
    for (const auto& [key, text] : overrides) {
        if (!defaults.contains(key)) throw ConfigError("unknown config field '" + key + "'");
        if (defaults[key].is_string()) {
            base[key] = text;
            continue;
        }
        nlohmann::json parsed = nlohmann::json::parse(text, nullptr, false);
        if (parsed.is_discarded()) throw ConfigError("cannot parse value '" + text + "' for --" + key);
        base[key] = parsed;
    }
    return base;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::map<std::string, std::string>& overrides) {
    nlohmann::json j = nlohmann::json::object();
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError("cannot read config file " + file->string());
        j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ConfigError("config file " + file->string() + " is not valid JSON");
    }
    return run_config_from_json(apply_overrides(std::move(j), overrides));
}

AugmentConfig RunConfig::augment_config() const {
    AugmentConfig a;
    a.crop_min = aug_crop_min;
    a.crop_max = aug_crop_max;
    a.shift_max = aug_shift;
    a.rotation_deg = aug_rotation;
    a.scale_min = aug_scale_min;
    a.scale_max = aug_scale_max;
    a.brightness_max = aug_brightness;
    a.contrast_max = aug_contrast;
    return a;
}

void RunConfig::validate() const {
    if (data != "blobs" && data != "csv" && data != "idx") throw ConfigError("data must be blobs, csv or idx");
    if (data != "blobs" && data_path.empty()) throw ConfigError("data_path is required for " + data + " data");
    if (mode != "em_only" && mode != "two_fold") throw ConfigError("mode must be em_only or two_fold");
    if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
    if (!(lr_em > 0.0) || !std::isfinite(lr_em)) throw ConfigError("lr_em must be positive");
    if (!(lr_kl >= 0.0) || !std::isfinite(lr_kl)) throw ConfigError("lr_kl must be non-negative");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (eval_every == 0) throw ConfigError("eval_every must be positive");
    if (out.empty()) throw ConfigError("out must name a directory");
    ClusterHeadConfig{clusters, gamma, batch_size}.validate();
    augment_config().validate();
}

Tensor InputTransform::apply_vectors(const Tensor& points) const {
    if (mean.empty()) return points;
    if (points.rank() != 2 || points.dim(1) != mean.size())
        throw DimensionError("input transform expects " + std::to_string(mean.size()) + " features, got shape " +
                             shape_string(points.shape()));
    Tensor out = points;
    for (std::size_t i = 0; i < out.dim(0); ++i)
        for (std::size_t d = 0; d < mean.size(); ++d) out.at(i, d) = (out.at(i, d) - mean[d]) / scale[d];
    return out;
}

Dataset InputTransform::apply(const Dataset& raw) const {
    if (raw.kind == DataKind::image) return sobel ? sobel_dataset(raw) : raw;
    Dataset out = raw;
    out.samples = apply_vectors(raw.samples);
    return out;
}

nlohmann::json to_json(const InputTransform& t) { return {{"sobel", t.sobel}, {"mean", t.mean}, {"scale", t.scale}}; }

InputTransform input_transform_from_json(const nlohmann::json& j) {
    InputTransform t;
    try {
        t.sobel = j.at("sobel").get<bool>();
        t.mean = j.at("mean").get<std::vector<double>>();
        t.scale = j.at("scale").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad input transform: ") + e.what());
    }
    if (t.mean.size() != t.scale.size()) throw FormatError("input transform mean/scale sizes differ");
    return t;
}

InputTransform fit_input_transform(const RunConfig& config, const Dataset& raw) {
    InputTransform t;
    if (raw.kind == DataKind::image) {
        t.sobel = config.sobel;
        return t;
    }
    if (!config.standardize) return t;
    const std::size_t n = raw.size(), d = raw.sample_shape()[0];
    t.mean.assign(d, 0.0);
    t.scale.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) t.mean[k] += raw.samples.at(i, k);
    for (auto& m : t.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) t.scale[k] += std::pow(raw.samples.at(i, k) - t.mean[k], 2);
    for (auto& s : t.scale) {
        s = std::sqrt(s / static_cast<double>(n));
        if (!(s > 1e-12)) s = 1.0;
    }
    return t;
}

Dataset load_dataset(const RunConfig& c) {
    Dataset d;
    if (c.data == "blobs") {
        d = make_blobs(c.blobs_clusters, c.blobs_points, c.blobs_separation, c.blobs_seed);
    } else if (c.data == "csv") {
        d = load_csv(c.data_path);
    } else if (c.data == "idx") {
        std::optional<std::filesystem::path> labels;
        if (!c.labels_path.empty()) labels = c.labels_path;
        d = load_idx(c.data_path, labels);
    } else {
        throw ConfigError("unknown data kind '" + c.data + "'");
    }
    if (c.limit > 0) d = d.head(c.limit);
    return d;
}

}  // namespace neuromix::cli
