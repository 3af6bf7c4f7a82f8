#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "biomlab/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using biomlab::pipeline::RunConfig;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int jobs = -1;
    std::string correction;
    bool dump_preprocessed = false;
};

RunConfig effective_config(const GlobalArgs& args) {
    RunConfig cfg = biomlab::pipeline::load_config(args.config_path);
    if (args.seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(args.seed);
        cfg.synth_cfg.seed = cfg.seed;
    }
    if (args.jobs >= 0) cfg.jobs = static_cast<unsigned>(args.jobs);
    if (!args.correction.empty()) cfg.bonferroni = args.correction == "bonferroni";
    if (args.dump_preprocessed) cfg.dump_preprocessed = true;
    cfg.raw = biomlab::pipeline::config_to_json(cfg);
    return cfg;
}

std::string resolve_out_dir(const GlobalArgs& args) {
    if (!args.out_dir.empty()) return args.out_dir;
    if (const char* env = std::getenv("BIOMARKER_LAB_OUT")) {
        if (*env) return env;
    }
    return "out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"biomarker-lab: passive-sensing biomarkers, loneliness labels, and the analysis chain"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags are accepted after the subcommand name

    GlobalArgs args;
    app.add_option("--config", args.config_path, "JSON config file (flags override config values)");
    app.add_option("--seed", args.seed, "root RNG seed");
    app.add_option("--jobs", args.jobs, "worker parallelism cap (0 = all cores)");
    app.add_option("--out-dir", args.out_dir, "output directory (default $BIOMARKER_LAB_OUT or ./out)");
    app.add_option("--correction", args.correction, "multiple-comparison correction: none|bonferroni")
        ->check(CLI::IsMember({"none", "bonferroni"}));
    app.add_flag("--dump-preprocessed", args.dump_preprocessed, "write per-fold preprocessed matrices");

    std::string raw_dir = "out/raw";
    std::string events_dir;
    std::string ucla_csv;
    std::string features_csv;
    std::string labels_csv;

    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort with planted group differences");

    auto* ingest = app.add_subcommand("ingest", "validate raw sensor CSVs and report coverage");
    ingest->add_option("--raw-dir", raw_dir, "directory with the six sensor CSVs")->required();

    auto* extract = app.add_subcommand("extract", "compute daily and participant-level biomarkers");
    extract->add_option("--events-dir", events_dir, "directory with sensor CSVs (raw or ingested)")->required();

    auto* label = app.add_subcommand("label", "score UCLA responses into loneliness labels");
    label->add_option("--ucla", ucla_csv, "ucla_post.csv path")->required();

    auto* stats = app.add_subcommand("stats", "socially-vs-emotionally-lonely comparison table");
    stats->add_option("--features", features_csv, "features_participant.csv path")->required();
    stats->add_option("--labels", labels_csv, "labels.csv path")->required();

    auto* train = app.add_subcommand("train", "fit the model roster on the full cohort and serialize");
    train->add_option("--features", features_csv)->required();
    train->add_option("--labels", labels_csv)->required();

    auto* evaluate = app.add_subcommand("evaluate", "nested leave-one-person-out benchmark");
    evaluate->add_option("--features", features_csv)->required();
    evaluate->add_option("--labels", labels_csv)->required();

    auto* explain = app.add_subcommand("explain", "per-fold TreeSHAP attributions and rankings");
    explain->add_option("--features", features_csv)->required();
    explain->add_option("--labels", labels_csv)->required();

    auto* report = app.add_subcommand("report", "render markdown tables from prior stage outputs");

    auto* pipeline = app.add_subcommand("pipeline", "run ingest through report");
    pipeline->add_option("--raw-dir", raw_dir, "directory with raw sensor CSVs and ucla_post.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = effective_config(args);
        const std::string out_root = resolve_out_dir(args);

        if (synth->parsed()) {
            biomlab::pipeline::stage_synth(cfg, (fs::path(out_root) / "raw").string());
        } else if (ingest->parsed()) {
            biomlab::pipeline::stage_ingest(cfg, raw_dir, (fs::path(out_root) / "ingest").string());
        } else if (extract->parsed()) {
            biomlab::pipeline::stage_extract(cfg, events_dir, (fs::path(out_root) / "features").string());
        } else if (label->parsed()) {
            biomlab::pipeline::stage_label(cfg, ucla_csv, (fs::path(out_root) / "labels").string());
        } else if (stats->parsed()) {
            biomlab::pipeline::stage_stats(cfg, features_csv, labels_csv,
                                           (fs::path(out_root) / "stats").string());
        } else if (train->parsed()) {
            biomlab::pipeline::stage_train(cfg, features_csv, labels_csv,
                                           (fs::path(out_root) / "models").string());
        } else if (evaluate->parsed()) {
            biomlab::pipeline::stage_evaluate(cfg, features_csv, labels_csv,
                                              (fs::path(out_root) / "eval").string());
        } else if (explain->parsed()) {
            biomlab::pipeline::stage_explain(cfg, features_csv, labels_csv,
                                             (fs::path(out_root) / "explain").string());
        } else if (report->parsed()) {
            biomlab::pipeline::stage_report(cfg, out_root);
        } else if (pipeline->parsed()) {
            biomlab::pipeline::run_pipeline(cfg, raw_dir, out_root);
        }
        return 0;
    } catch (const biomlab::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
