#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flowtriage/errors.hpp"
#include "flowtriage/io.hpp"
#include "flowtriage/pipeline.hpp"

namespace {

struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> input;
    std::optional<std::string> output;
    std::optional<std::int64_t> window_ms;
    std::optional<double> alpha;
    std::optional<int> folds;
    std::optional<int> jobs;
    std::optional<int> epochs;
    std::optional<int> passes;
    std::optional<std::string> mode;
    std::optional<int> fold;
    std::optional<double> threshold;
    std::optional<double> percentile;
    std::optional<std::string> threshold_mode;
    std::optional<std::string> backend_url;
    std::optional<std::string> backend_model;
    std::optional<int> duration_min;
    bool reveal_real_ips = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "pipeline config file (JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "global seed");
    cmd->add_option("--output", o.output, "output directory");
    cmd->add_option("--jobs", o.jobs, "parallel (mode, fold) training tasks")
        ->check(CLI::PositiveNumber);
}

void add_dataset(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--input", o.input, "flow CSV (omit to synthesize the built-in scenario)");
    cmd->add_option("--window-ms", o.window_ms, "aggregation window length in ms")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", o.alpha, "training-period fraction, in (0,1)");
    cmd->add_option("--folds", o.folds, "expanding-window fold count")->check(CLI::Range(2, 64));
}

flowtriage::PipelineConfig build_config(const Overrides& o) {
    flowtriage::PipelineConfig cfg;
    if (o.config_path) cfg = flowtriage::config_from_json(flowtriage::read_file(*o.config_path));
    if (o.seed) cfg.seed = *o.seed;
    if (o.input) cfg.input.path = *o.input;
    if (o.output) cfg.output_dir = *o.output;
    if (o.window_ms) cfg.window_ms = *o.window_ms;
    if (o.alpha) cfg.train_fraction = *o.alpha;
    if (o.folds) cfg.folds = *o.folds;
    if (o.jobs) cfg.jobs = *o.jobs;
    if (o.epochs) cfg.autoencoder.epochs = *o.epochs;
    if (o.passes) cfg.ppo.passes = *o.passes;
    if (o.mode) cfg.triage.mode = *o.mode;
    if (o.fold) cfg.triage.fold = *o.fold;
    if (o.threshold) {
        cfg.triage.threshold = *o.threshold;
        cfg.triage.threshold_mode = "absolute";
    }
    if (o.percentile) {
        cfg.triage.percentile = *o.percentile;
        cfg.triage.threshold_mode = "percentile";
    }
    if (o.threshold_mode) cfg.triage.threshold_mode = *o.threshold_mode;
    if (o.backend_url) cfg.backend.url = *o.backend_url;
    if (o.backend_model) cfg.backend.model = *o.backend_model;
    if (o.duration_min) cfg.scenario.duration_min = *o.duration_min;
    if (o.reveal_real_ips) cfg.triage.reveal_real_ips = true;
    if (const char* key = std::getenv("FLOWTRIAGE_BACKEND_KEY")) cfg.backend.key = key;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netflow containment pipeline: simulate, score, train, and triage"};
    app.require_subcommand(1);
    Overrides o;

    CLI::App* sim = app.add_subcommand("simulate", "generate a labeled synthetic flow dataset");
    add_common(sim, o);
    sim->add_option("--duration-min", o.duration_min, "scenario length in minutes")
        ->check(CLI::PositiveNumber);

    CLI::App* ing = app.add_subcommand("ingest", "normalize a flow CSV export");
    add_common(ing, o);
    ing->add_option("--input", o.input, "flow CSV to parse")->required();

    CLI::App* sco = app.add_subcommand("score", "fit the anomaly model and score all windows");
    add_common(sco, o);
    add_dataset(sco, o);
    sco->add_option("--epochs", o.epochs, "autoencoder training epochs")
        ->check(CLI::NonNegativeNumber);

    CLI::App* trn = app.add_subcommand("train", "train containment agents per reward mode and fold");
    add_common(trn, o);
    add_dataset(trn, o);
    trn->add_option("--passes", o.passes, "policy optimization passes")
        ->check(CLI::NonNegativeNumber);

    CLI::App* tri = app.add_subcommand("triage", "gate scored windows and write analyst reports");
    add_common(tri, o);
    add_dataset(tri, o);
    tri->add_option("--mode", o.mode, "agent reward mode (A|B|C|D)");
    tri->add_option("--fold", o.fold, "agent fold number (default: last)");
    tri->add_option("--threshold", o.threshold, "absolute priority threshold");
    tri->add_option("--percentile", o.percentile, "percentile threshold (switches mode)");
    tri->add_option("--threshold-mode", o.threshold_mode, "absolute | percentile");
    tri->add_option("--backend-url", o.backend_url,
                    "chat-completion endpoint (omit for the built-in analyst)");
    tri->add_option("--model", o.backend_model, "backend model name");
    tri->add_flag("--reveal-real-ips", o.reveal_real_ips,
                  "render local reports with real addresses (built-in analyst only)");

    CLI::App* orc = app.add_subcommand("oracle", "verify the scoring chain against known values");
    (void)orc;

    CLI::App* rep = app.add_subcommand("report", "print collected pipeline summaries");
    add_common(rep, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (orc->parsed()) return flowtriage::cmd_oracle();
        const flowtriage::PipelineConfig cfg = build_config(o);
        if (sim->parsed()) return flowtriage::cmd_simulate(cfg);
        if (ing->parsed()) return flowtriage::cmd_ingest(cfg);
        if (sco->parsed()) return flowtriage::cmd_score(cfg);
        if (trn->parsed()) return flowtriage::cmd_train(cfg);
        if (tri->parsed()) return flowtriage::cmd_triage(cfg);
        if (rep->parsed()) return flowtriage::cmd_report(cfg);
    } catch (const flowtriage::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
