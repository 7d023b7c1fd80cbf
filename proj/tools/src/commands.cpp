#include "commands.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <random>

#include "neuromix/error.hpp"
#include "neuromix/session.hpp"

namespace neuromix::cli {

namespace fs = std::filesystem;

std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

namespace {

ArchSpec arch_for(const RunConfig& config, const Shape& input) {
    try {
        return parse_arch(config.arch, input);
    } catch (const ParseError& e) {
        throw ConfigError(std::string("arch: ") + e.what());
    }
}

SessionConfig session_config(const RunConfig& c) {
    SessionConfig s;
    s.head = {c.clusters, c.gamma, c.batch_size};
    s.normalize = c.normalize;
    s.posterior_priors = c.posterior_priors;
    return s;
}

nlohmann::json nullable(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json checkpoint_metadata(const RunConfig& config, const InputTransform& transform) {
    return {{"run", to_json(config)}, {"input_transform", to_json(transform)}};
}

EvalReport evaluate_model(const Model& model, const RelevanceStats& stats, const RunConfig& config,
                          const Dataset& inputs, std::size_t batch_size) {
    model.check_batch(inputs.samples);
    const std::size_t k = model.clusters();
    std::vector<std::size_t> pred;
    pred.reserve(inputs.size());
    std::vector<double> h_sum(k, 0.0);
    for (const auto& idx : sequential_batches(inputs.size(), std::max<std::size_t>(batch_size, 1))) {
        const Tensor a = eval_normalized(model, stats, inputs.gather(idx), config.normalize);
        const auto assigned = argmax_rows(a);
        pred.insert(pred.end(), assigned.begin(), assigned.end());
        const Tensor h = cluster_likelihoods(a, config.gamma);
        for (std::size_t i = 0; i < h.dim(0); ++i)
            for (std::size_t j = 0; j < k; ++j) h_sum[j] += h.at(i, j);
    }
    EvalReport report = evaluate_assignments(pred, k, inputs.labels);
    for (auto& v : h_sum) v /= static_cast<double>(inputs.size());
    report.h_mean = std::move(h_sum);
    return report;
}

TrainResult train(const RunConfig& config, std::ostream* log) {
    config.validate();
    const Dataset raw = load_dataset(config);
    const bool images = raw.kind == DataKind::image;
    const bool transformed = images && config.augment;
    if (config.two_fold() && !transformed)
        throw ConfigError("two_fold mode needs image data with augment enabled");
    if (config.batch_size > raw.size())
        throw ConfigError("batch_size " + std::to_string(config.batch_size) + " exceeds dataset size " +
                          std::to_string(raw.size()));

    const InputTransform transform = fit_input_transform(config, raw);
    const Dataset inputs = transform.apply(raw);
    const ArchSpec arch = arch_for(config, inputs.sample_shape());
    if (arch.clusters() != config.clusters)
        throw ConfigError("arch ends in F" + std::to_string(arch.clusters()) + " but clusters is " +
                          std::to_string(config.clusters));

    const fs::path out_dir = config.out;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    write_json_file(out_dir / "config.json", to_json(config));
    std::ofstream metrics(out_dir / "metrics.jsonl");
    if (!metrics) throw DataError("cannot write metrics log in " + out_dir.string());

    Model model = Model::build(arch, config.seed);
    ClusterSession session(model, session_config(config), AdamConfig{.lr = config.lr_em},
                           AdamConfig{.lr = config.lr_kl});
    const AugmentConfig aug = config.augment_config();
    const std::size_t k = config.clusters;

    std::size_t step = 0;
    std::vector<double> train_h(k, 0.0);
    double last_em = 0.0, last_kl = 0.0;
    EvalReport report;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Dataset tr;
        if (transformed) tr = transform.apply(augment_dataset(raw, aug, config.augment_seed, epoch));

        double sum_em = 0.0, sum_kl = 0.0;
        std::vector<double> h_sum(k, 0.0);
        const auto batches = make_batches(inputs.size(), config.batch_size, config.shuffle_seed, epoch);
        for (const auto& idx : batches) {
            const Tensor batch = inputs.gather(idx);
            StepReport r;
            if (config.two_fold()) {
                r = session.two_fold_step(batch, tr.gather(idx));
            } else if (transformed) {
                r = session.em_step(batch, tr.gather(idx));
            } else {
                r = session.em_step(batch);
            }
            sum_em += r.loss_em;
            sum_kl += r.loss_kl;
            for (std::size_t j = 0; j < k; ++j) h_sum[j] += r.h_mean[j];
            ++step;
        }
        const double nb = static_cast<double>(batches.size());
        last_em = sum_em / nb;
        last_kl = sum_kl / nb;
        for (std::size_t j = 0; j < k; ++j) train_h[j] = h_sum[j] / nb;

        const bool last = epoch + 1 == config.epochs;
        nlohmann::json line = {{"epoch", epoch + 1}, {"step", step},          {"loss_em", last_em},
                               {"loss_kl", last_kl}, {"h_mean", train_h},     {"occupancy", nullptr},
                               {"accuracy", nullptr}, {"nmi", nullptr}};
        if (last || (epoch + 1) % config.eval_every == 0) {
            report = evaluate_model(model, session.stats(), config, inputs, config.batch_size);
            line["occupancy"] = report.occupancy;
            line["accuracy"] = nullable(report.accuracy);
            line["nmi"] = nullable(report.nmi);
        }
        metrics << line.dump() << '\n';
        metrics.flush();
        if (log) {
            *log << "epoch " << epoch + 1 << "/" << config.epochs << " loss_em " << last_em;
            if (config.two_fold()) *log << " loss_kl " << last_kl;
            if (report.accuracy && !line["accuracy"].is_null()) *log << " acc " << *report.accuracy;
            *log << '\n';
        }
    }

    TrainResult result;
    result.checkpoint = out_dir / "checkpoint.json";
    save_checkpoint(result.checkpoint, model, session.stats(), checkpoint_metadata(config, transform));

    const MonteCarloReport mc = [&] {
        MonteCarloReport m;
        m.h_mean = train_h;
        for (std::size_t j = 0; j < k; ++j)
            if (std::abs(train_h[j] - 0.5) > m.tolerance) m.flagged.push_back(j);
        return m;
    }();
    nlohmann::json rj = to_json(report);
    rj["train_h_mean"] = train_h;
    rj["monte_carlo_ok"] = mc.ok();
    rj["epochs"] = config.epochs;
    rj["steps"] = step;
    rj["mode"] = config.mode;
    rj["final_loss_em"] = last_em;
    rj["final_loss_kl"] = last_kl;
    write_json_file(out_dir / "report.json", rj);

    result.report = std::move(report);
    result.report_json = std::move(rj);
    return result;
}

LoadedRun load_run(const fs::path& checkpoint) {
    LoadedRun run{load_checkpoint(checkpoint), {}, {}};
    const auto& meta = run.checkpoint.config;
    if (!meta.is_object() || !meta.contains("run") || !meta.contains("input_transform"))
        throw FormatError("checkpoint " + checkpoint.string() + " carries no run configuration");
    try {
        run.config = run_config_from_json(meta.at("run"));
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint run configuration: ") + e.what());
    }
    run.transform = input_transform_from_json(meta.at("input_transform"));
    return run;
}

GridBox data_box(const Dataset& raw, double margin) {
    if (raw.kind != DataKind::vector || raw.sample_shape() != Shape{2})
        throw DimensionError("contour export needs 2-D vector data");
    GridBox b{raw.samples.at(0, 0), raw.samples.at(0, 0), raw.samples.at(0, 1), raw.samples.at(0, 1)};
    for (std::size_t i = 0; i < raw.size(); ++i) {
        b.xmin = std::min(b.xmin, raw.samples.at(i, 0));
        b.xmax = std::max(b.xmax, raw.samples.at(i, 0));
        b.ymin = std::min(b.ymin, raw.samples.at(i, 1));
        b.ymax = std::max(b.ymax, raw.samples.at(i, 1));
    }
    const double mx = (b.xmax - b.xmin) * margin, my = (b.ymax - b.ymin) * margin;
    return {b.xmin - mx, b.xmax + mx, b.ymin - my, b.ymax + my};
}

void export_contours(const LoadedRun& run, std::size_t grid, const GridBox& box, const fs::path& out) {
    const Model& model = run.checkpoint.model;
    if (model.input_shape() != Shape{2}) throw DimensionError("contour export needs a model with 2-D input");
    if (grid < 2) throw ConfigError("grid must be at least 2");
    if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin)) throw ConfigError("grid box is empty");

    Tensor points({grid * grid, 2});
    for (std::size_t r = 0; r < grid; ++r)
        for (std::size_t c = 0; c < grid; ++c) {
            const std::size_t i = r * grid + c;
            points.at(i, 0) = box.xmin + (box.xmax - box.xmin) * static_cast<double>(c) / static_cast<double>(grid - 1);
            points.at(i, 1) = box.ymin + (box.ymax - box.ymin) * static_cast<double>(r) / static_cast<double>(grid - 1);
        }
    const Tensor a = eval_normalized(model, run.checkpoint.stats, run.transform.apply_vectors(points),
                                     run.config.normalize);
    const Tensor h = cluster_likelihoods(a, run.config.gamma);

    std::ofstream f(out);
    if (!f) throw DataError("cannot write " + out.string());
    const std::size_t k = model.clusters();
    f << "x,y";
    for (std::size_t j = 0; j < k; ++j) f << ",h_" << j + 1;
    f << '\n';
    for (std::size_t i = 0; i < points.dim(0); ++i) {
        f << format_number(points.at(i, 0)) << ',' << format_number(points.at(i, 1));
        for (std::size_t j = 0; j < k; ++j) f << ',' << format_number(h.at(i, j));
        f << '\n';
    }
}

void export_responses(const LoadedRun& run, const Dataset& inputs, const fs::path& out, std::size_t batch_size) {
    const Model& model = run.checkpoint.model;
    model.check_batch(inputs.samples);
    std::ofstream f(out);
    if (!f) throw DataError("cannot write " + out.string());
    const std::size_t k = model.clusters();
    for (std::size_t j = 0; j < k; ++j) f << (j ? "," : "") << "a_" << j + 1;
    f << '\n';
    for (const auto& idx : sequential_batches(inputs.size(), std::max<std::size_t>(batch_size, 1))) {
        const Tensor a = eval_normalized(model, run.checkpoint.stats, inputs.gather(idx), run.config.normalize);
        for (std::size_t i = 0; i < a.dim(0); ++i) {
            for (std::size_t j = 0; j < k; ++j) f << (j ? "," : "") << format_number(a.at(i, j));
            f << '\n';
        }
    }
}

std::string ActivationTarget::str() const {
    return kind == Kind::neuron ? "neuron:" + std::to_string(index)
                                : "filter:" + std::to_string(layer) + ":" + std::to_string(index);
}

ActivationTarget parse_target(const std::string& text) {
    std::vector<std::size_t> nums;
    std::string head;
    std::size_t pos = text.find(':');
    head = text.substr(0, pos);
    while (pos != std::string::npos) {
        const std::size_t next = text.find(':', pos + 1);
        const std::string part = text.substr(pos + 1, next == std::string::npos ? std::string::npos : next - pos - 1);
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc() || ptr != part.data() + part.size())
            throw ConfigError("bad target '" + text + "'");
        nums.push_back(v);
        pos = next;
    }
    ActivationTarget t;
    if (head == "neuron" && nums.size() == 1) {
        t.index = nums[0];
    } else if (head == "filter" && nums.size() == 2) {
        t.kind = ActivationTarget::Kind::filter;
        t.layer = nums[0];
        t.index = nums[1];
    } else {
        throw ConfigError("target must be neuron:J or filter:L:F, got '" + text + "'");
    }
    return t;
}

namespace {

// Scalar activation of `target` for input x, recorded on `tape`.
Var target_activation(const Model& model, const ActivationTarget& target, Tape& tape, Var x) {
    if (target.kind == ActivationTarget::Kind::neuron) {
        if (target.index >= model.clusters())
            throw ConfigError("neuron " + std::to_string(target.index) + " out of range (K = " +
                              std::to_string(model.clusters()) + ")");
        Var a = model.forward_frozen(tape, x);
        Tensor pick(a.shape());
        pick[target.index] = 1.0;
        return weighted_sum(pick, a);
    }
    std::size_t conv_seen = 0;
    Var h = x;
    for (const Layer& layer : model.layers()) {
        h = forward_frozen(layer, tape, h);
        if (layer_kind(layer) != LayerKind::conv2d) continue;
        if (conv_seen++ != target.layer) continue;
        const auto& s = h.shape();
        if (target.index >= s[1])
            throw ConfigError("filter " + std::to_string(target.index) + " out of range (layer has " +
                              std::to_string(s[1]) + ")");
        Tensor pick(s);
        const std::size_t hw = s[2] * s[3];
        for (std::size_t i = 0; i < hw; ++i) pick[target.index * hw + i] = 1.0 / static_cast<double>(hw);
        return weighted_sum(pick, h);
    }
    throw ConfigError("conv layer " + std::to_string(target.layer) + " out of range (model has " +
                      std::to_string(conv_seen) + ")");
}

}  // namespace

ActivationResult activation_maximize(const Model& model, const ActivationTarget& target, std::size_t steps, double lr,
                                     std::uint64_t seed) {
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    Shape shape{1};
    shape.insert(shape.end(), model.input_shape().begin(), model.input_shape().end());
    ActivationResult result;
    result.input = Tensor(shape);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (auto& v : result.input.data()) v = u(rng);

    for (std::size_t s = 0; s <= steps; ++s) {
        Tape tape;
        Var x = tape.input(result.input);
        Var act = target_activation(model, target, tape, x);
        result.trace.push_back(act.value()[0]);
        if (s == steps) break;
        tape.backward(act);
        const Tensor g = tape.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) result.input[i] += lr * g[i];
    }
    return result;
}

nlohmann::json to_json(const ActivationResult& r, const ActivationTarget& target, std::size_t steps, double lr,
                       std::uint64_t seed) {
    return {{"target", target.str()},
            {"steps", steps},
            {"lr", lr},
            {"seed", seed},
            {"initial_activation", r.trace.front()},
            {"final_activation", r.trace.back()},
            {"trace", r.trace},
            {"shape", r.input.shape()},
            {"data", std::vector<double>(r.input.data().begin(), r.input.data().end())}};
}

}  // namespace neuromix::cli
