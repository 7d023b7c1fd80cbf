#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "commands.hpp"
#include "neuromix/error.hpp"
#include "neuromix/session.hpp"

using namespace neuromix;
using namespace neuromix::cli;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumeric = 4 };

const std::vector<std::string> kDataKeys = {"data",         "data_path",       "labels_path",      "limit",
                                            "blobs_clusters", "blobs_points", "blobs_separation", "blobs_seed",
                                            "batch_size"};

// One string-valued option per config key; only flags actually given end up
// in `overrides`.
void add_config_flags(CLI::App* cmd, const std::vector<std::string>& keys, std::map<std::string, std::string>& store) {
    for (const auto& key : keys) {
        cmd->add_option_function<std::string>(
            "--" + key, [&store, key](const std::string& v) { store[key] = v; }, "override config field " + key);
    }
}

int report_error(const std::exception& e, int code) {
    std::cerr << "neuromix: " << e.what() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neural mixture-model clustering"};
    app.require_subcommand(1);

    std::map<std::string, std::string> overrides;
    std::optional<std::string> config_file;
    std::string checkpoint, output, target = "neuron:0";
    std::size_t grid = 100, steps = 200;
    double lr = 0.1;
    std::uint64_t seed = 0;
    std::optional<double> xmin, xmax, ymin, ymax;
    std::optional<std::string> report_path, contingency_path;
    std::size_t blob_k = 10, blob_points = 1000;
    double blob_sep = 8.0;

    auto* train_cmd = app.add_subcommand("train", "train a clustering network");
    train_cmd->add_option("--config", config_file, "JSON run configuration");
    add_config_flags(train_cmd, run_config_keys(), overrides);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", checkpoint)->required();
    eval_cmd->add_option("--report", report_path, "also write the report here");
    eval_cmd->add_option("--contingency", contingency_path, "write the contingency table as CSV");
    add_config_flags(eval_cmd, kDataKeys, overrides);

    auto* contour_cmd = app.add_subcommand("export-contours", "cluster likelihoods over a 2-D grid");
    contour_cmd->add_option("--checkpoint", checkpoint)->required();
    contour_cmd->add_option("--output", output)->required();
    contour_cmd->add_option("--grid", grid, "points per axis")->capture_default_str();
    contour_cmd->add_option("--xmin", xmin);
    contour_cmd->add_option("--xmax", xmax);
    contour_cmd->add_option("--ymin", ymin);
    contour_cmd->add_option("--ymax", ymax);

    auto* resp_cmd = app.add_subcommand("export-responses", "normalized relevance scores per sample");
    resp_cmd->add_option("--checkpoint", checkpoint)->required();
    resp_cmd->add_option("--output", output)->required();
    add_config_flags(resp_cmd, kDataKeys, overrides);

    auto* act_cmd = app.add_subcommand("activation-max", "synthesize an input maximizing a neuron or filter");
    act_cmd->add_option("--checkpoint", checkpoint)->required();
    act_cmd->add_option("--output", output)->required();
    act_cmd->add_option("--target", target, "neuron:J or filter:L:F")->capture_default_str();
    act_cmd->add_option("--steps", steps)->capture_default_str();
    act_cmd->add_option("--lr", lr)->capture_default_str();
    act_cmd->add_option("--seed", seed)->capture_default_str();

    auto* blobs_cmd = app.add_subcommand("make-blobs", "write a synthetic Gaussian-blob CSV");
    blobs_cmd->add_option("--output", output)->required();
    blobs_cmd->add_option("--clusters", blob_k)->capture_default_str();
    blobs_cmd->add_option("--points", blob_points, "points per cluster")->capture_default_str();
    blobs_cmd->add_option("--separation", blob_sep, "minimum centre distance in sigmas")->capture_default_str();
    blobs_cmd->add_option("--seed", seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (train_cmd->parsed()) {
            std::optional<std::filesystem::path> file;
            if (config_file) file = *config_file;
            TrainResult r = train(load_run_config(file, overrides), &std::cerr);
            std::cout << r.report_json.dump(2) << '\n';
        } else if (eval_cmd->parsed()) {
            LoadedRun run = load_run(checkpoint);
            RunConfig cfg = run_config_from_json(apply_overrides(to_json(run.config), overrides));
            const Dataset inputs = run.transform.apply(load_dataset(cfg));
            EvalReport report = evaluate_model(run.checkpoint.model, run.checkpoint.stats, cfg, inputs, cfg.batch_size);
            const auto j = to_json(report);
            std::cout << j.dump(2) << '\n';
            if (report_path) write_json_file(*report_path, j);
            if (contingency_path) {
                if (!inputs.labels) throw DataError("contingency table needs labels");
                std::vector<std::size_t> pred;
                for (const auto& idx : sequential_batches(inputs.size(), cfg.batch_size)) {
                    auto a = argmax_rows(eval_normalized(run.checkpoint.model, run.checkpoint.stats,
                                                         inputs.gather(idx), cfg.normalize));
                    pred.insert(pred.end(), a.begin(), a.end());
                }
                write_contingency_csv(*contingency_path, contingency(pred, *inputs.labels, cfg.clusters));
            }
        } else if (contour_cmd->parsed()) {
            LoadedRun run = load_run(checkpoint);
            GridBox box{};
            if (!(xmin && xmax && ymin && ymax)) box = data_box(load_dataset(run.config));
            if (xmin) box.xmin = *xmin;
            if (xmax) box.xmax = *xmax;
            if (ymin) box.ymin = *ymin;
            if (ymax) box.ymax = *ymax;
            export_contours(run, grid, box, output);
        } else if (resp_cmd->parsed()) {
            LoadedRun run = load_run(checkpoint);
            RunConfig cfg = run_config_from_json(apply_overrides(to_json(run.config), overrides));
            export_responses(run, run.transform.apply(load_dataset(cfg)), output, cfg.batch_size);
        } else if (act_cmd->parsed()) {
            LoadedRun run = load_run(checkpoint);
            const ActivationTarget t = parse_target(target);
            ActivationResult r = activation_maximize(run.checkpoint.model, t, steps, lr, seed);
            write_json_file(output, to_json(r, t, steps, lr, seed));
            std::cerr << t.str() << ": " << r.trace.front() << " -> " << r.trace.back() << '\n';
        } else if (blobs_cmd->parsed()) {
            write_csv(output, make_blobs(blob_k, blob_points, blob_sep, seed));
        }
    } catch (const ConfigError& e) {
        return report_error(e, kConfig);
    } catch (const NumericError& e) {
        return report_error(e, kNumeric);
    } catch (const DataError& e) {
        return report_error(e, kData);
    } catch (const ParseError& e) {
        return report_error(e, kData);
    } catch (const FormatError& e) {
        return report_error(e, kData);
    } catch (const DimensionError& e) {
        return report_error(e, kData);
    } catch (const std::exception& e) {
        return report_error(e, kFailure);
    }
    return kOk;
}
