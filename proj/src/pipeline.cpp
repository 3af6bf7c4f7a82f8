#include "biomlab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>

#include "biomlab/csv.hpp"
#include "biomlab/digest.hpp"
#include "biomlab/explain.hpp"
#include "biomlab/ingest.hpp"
#include "biomlab/labeling.hpp"
#include "biomlab/parallel.hpp"
#include "biomlab/rng.hpp"
#include "biomlab/stats.hpp"

namespace biomlab::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig RunConfig::defaults() {
    RunConfig cfg;
    cfg.feature_cfg.utc_offset_minutes = cfg.utc_offset_minutes;
    cfg.roster = {
        {"bl1_majority", {}},
        {"bl2_decision_tree", {}},
        {"bl3_weighted_random", {}},
        {"knn", {{"k", {3, 5, 7}}}},
        {"svm_linear", {{"C", {0.5, 2.0, 8.0}}}},
        {"random_forest", {{"n_trees", {100}}, {"max_depth", {12}}}},
        {"gbt", {{"n_estimators", {100}}, {"eta", {0.2}}, {"max_depth", {3}}}},
    };
    cfg.raw = config_to_json(cfg);
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json roster = json::array();
    for (const auto& entry : cfg.roster) {
        json grid = json::object();
        for (const auto& [k, v] : entry.grid) grid[k] = v;
        roster.push_back(json{{"model", entry.model}, {"grid", std::move(grid)}});
    }
    return json{
        {"seed", cfg.seed},
        {"jobs", cfg.jobs},
        {"utc_offset_minutes", cfg.utc_offset_minutes},
        {"features",
         {{"cluster_eps_m", cfg.feature_cfg.cluster_eps_m},
          {"cluster_min_samples", cfg.feature_cfg.cluster_min_samples},
          {"glance_pairing_s", cfg.feature_cfg.glance_pairing_s},
          {"occupancy_cap_min", cfg.feature_cfg.occupancy_cap_min}}},
        {"stats", {{"resamples", cfg.stats_resamples}, {"correction", cfg.bonferroni ? "bonferroni" : "none"}}},
        {"preprocess",
         {{"zscore_enabled", cfg.eval_cfg.prep.zscore_enabled},
          {"zscore_threshold", cfg.eval_cfg.prep.zscore_threshold},
          {"smote_enabled", cfg.eval_cfg.prep.smote_enabled},
          {"smote_k", cfg.eval_cfg.prep.smote_k}}},
        {"eval",
         {{"inner_folds", cfg.eval_cfg.inner_folds},
          {"search_budget", cfg.eval_cfg.search_budget},
          {"roster", std::move(roster)}}},
        {"explain", {{"models", cfg.explain_models}, {"top_k", cfg.explain_top_k}}},
        {"synth", synth::cohort_config_to_json(cfg.synth_cfg)},
        {"dump_preprocessed", cfg.dump_preprocessed},
    };
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg = RunConfig::defaults();
    if (path.empty()) return cfg;
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": invalid JSON config: " + e.what());
    }

    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<unsigned>();
    if (j.contains("utc_offset_minutes")) cfg.utc_offset_minutes = j.at("utc_offset_minutes").get<int>();
    if (j.contains("features")) {
        const auto& f = j.at("features");
        if (f.contains("cluster_eps_m")) cfg.feature_cfg.cluster_eps_m = f.at("cluster_eps_m").get<double>();
        if (f.contains("cluster_min_samples")) {
            cfg.feature_cfg.cluster_min_samples = f.at("cluster_min_samples").get<int>();
        }
        if (f.contains("glance_pairing_s")) cfg.feature_cfg.glance_pairing_s = f.at("glance_pairing_s").get<double>();
        if (f.contains("occupancy_cap_min")) {
            cfg.feature_cfg.occupancy_cap_min = f.at("occupancy_cap_min").get<double>();
        }
    }
    if (j.contains("stats")) {
        const auto& s = j.at("stats");
        if (s.contains("resamples")) cfg.stats_resamples = s.at("resamples").get<std::size_t>();
        if (s.contains("correction")) cfg.bonferroni = s.at("correction").get<std::string>() == "bonferroni";
    }
    if (j.contains("preprocess")) {
        const auto& p = j.at("preprocess");
        if (p.contains("zscore_enabled")) cfg.eval_cfg.prep.zscore_enabled = p.at("zscore_enabled").get<bool>();
        if (p.contains("zscore_threshold")) {
            cfg.eval_cfg.prep.zscore_threshold = p.at("zscore_threshold").get<double>();
        }
        if (p.contains("smote_enabled")) cfg.eval_cfg.prep.smote_enabled = p.at("smote_enabled").get<bool>();
        if (p.contains("smote_k")) cfg.eval_cfg.prep.smote_k = p.at("smote_k").get<int>();
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        if (e.contains("inner_folds")) cfg.eval_cfg.inner_folds = e.at("inner_folds").get<int>();
        if (e.contains("search_budget")) cfg.eval_cfg.search_budget = e.at("search_budget").get<std::size_t>();
        if (e.contains("roster")) {
            cfg.roster.clear();
            for (const auto& rj : e.at("roster")) {
                eval::RosterEntry entry;
                entry.model = rj.at("model").get<std::string>();
                if (rj.contains("grid")) {
                    for (auto it = rj.at("grid").begin(); it != rj.at("grid").end(); ++it) {
                        entry.grid[it.key()] = it.value().get<std::vector<double>>();
                    }
                }
                cfg.roster.push_back(std::move(entry));
            }
        }
    }
    if (j.contains("explain")) {
        const auto& e = j.at("explain");
        if (e.contains("models")) cfg.explain_models = e.at("models").get<std::vector<std::string>>();
        if (e.contains("top_k")) cfg.explain_top_k = e.at("top_k").get<std::size_t>();
    }
    if (j.contains("synth")) cfg.synth_cfg = synth::cohort_config_from_json(j.at("synth"));
    if (j.contains("dump_preprocessed")) cfg.dump_preprocessed = j.at("dump_preprocessed").get<bool>();

    cfg.feature_cfg.utc_offset_minutes = cfg.utc_offset_minutes;
    cfg.synth_cfg.utc_offset_minutes = cfg.utc_offset_minutes;
    cfg.synth_cfg.seed = cfg.seed;
    cfg.raw = config_to_json(cfg);
    return cfg;
}

namespace {

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    std::int64_t elapsed_ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void write_manifest(const std::string& out_dir, const std::string& stage, const RunConfig& cfg,
                    const std::vector<std::string>& input_paths, const std::vector<std::string>& output_files,
                    std::int64_t elapsed_ms, json extra = json::object()) {
    json inputs = json::object();
    for (const auto& p : input_paths) {
        if (fs::exists(p) && fs::is_regular_file(p)) inputs[p] = sha256_file_hex(p);
    }
    json outputs = json::object();
    for (const auto& name : output_files) {
        const auto path = (fs::path(out_dir) / name).string();
        if (fs::exists(path)) outputs[name] = sha256_file_hex(path);
    }
    json m{{"tool_version", kToolVersion},
           {"stage", stage},
           {"seed", cfg.seed},
           {"prng", kPrngId},
           {"config_hash", sha256_hex(cfg.raw.dump())},
           {"config", cfg.raw},
           {"inputs", std::move(inputs)},
           {"outputs", std::move(outputs)},
           {"timings_ms", json{{stage, elapsed_ms}}}};
    if (!extra.empty()) m["notes"] = std::move(extra);
    write_text_file((fs::path(out_dir) / "manifest.json").string(), m.dump(2) + "\n");
}

std::string require_file(const std::string& path) {
    if (!fs::exists(path)) throw ValidationError("missing input: " + path);
    return path;
}

}  // namespace

LabeledFeatures load_labeled_features(const std::string& features_csv, const std::string& labels_csv) {
    const auto table = features::load_participant_csv(require_file(features_csv));
    const auto labels = labeling::load_labels_csv(require_file(labels_csv));
    std::map<std::string, int> label_of;
    for (const auto& a : labels) label_of[a.participant_id] = static_cast<int>(a.category);

    LabeledFeatures out;
    out.x.col_names = features::participant_feature_names();
    for (std::size_t i = 0; i < table.participant_ids.size(); ++i) {
        const auto it = label_of.find(table.participant_ids[i]);
        if (it == label_of.end()) continue;  // no post-study survey: excluded
        out.x.row_ids.push_back(table.participant_ids[i]);
        out.x.data.push_back(table.rows[i]);
        out.y.push_back(it->second);
        out.ids.push_back(table.participant_ids[i]);
    }
    return out;
}

void stage_synth(const RunConfig& cfg, const std::string& out_dir) {
    StageTimer timer;
    fs::create_directories(out_dir);
    synth::CohortConfig sc = cfg.synth_cfg;
    sc.seed = cfg.seed;
    sc.utc_offset_minutes = cfg.utc_offset_minutes;
    synth::generate(sc, out_dir);
    std::vector<std::string> outputs = {"ucla_post.csv", "manifest.json"};
    for (int k = 0; k < ingest::kNumSensorKinds; ++k) {
        outputs.push_back(ingest::sensor_file_name(static_cast<ingest::SensorKind>(k)));
    }
    // synth writes its own ground-truth manifest.json; the stage manifest goes
    // alongside under a distinct name to keep both auditable
    json inputs = json::object();
    json outs = json::object();
    for (const auto& name : outputs) {
        const auto path = (fs::path(out_dir) / name).string();
        if (fs::exists(path)) outs[name] = sha256_file_hex(path);
    }
    json m{{"tool_version", kToolVersion},          {"stage", "synth"},
           {"seed", cfg.seed},                      {"prng", kPrngId},
           {"config_hash", sha256_hex(cfg.raw.dump())}, {"config", cfg.raw},
           {"inputs", inputs},                      {"outputs", outs},
           {"timings_ms", json{{"synth", timer.elapsed_ms()}}}};
    write_text_file((fs::path(out_dir) / "stage_manifest.json").string(), m.dump(2) + "\n");
}

void stage_ingest(const RunConfig& cfg, const std::string& raw_dir, const std::string& out_dir) {
    StageTimer timer;
    fs::create_directories(out_dir);
    std::vector<std::string> inputs, outputs;
    std::string errors_jsonl;
    std::vector<ingest::DayWindow> windows;
    {
        std::vector<std::vector<ingest::SensorEvent>> streams;
        for (int k = 0; k < ingest::kNumSensorKinds; ++k) {
            const auto kind = static_cast<ingest::SensorKind>(k);
            const auto path = (fs::path(raw_dir) / ingest::sensor_file_name(kind)).string();
            require_file(path);
            inputs.push_back(path);
            auto parsed = ingest::parse_sensor_file(path, kind);
            for (const auto& err : parsed.rejected) {
                errors_jsonl +=
                    json{{"file", err.file}, {"line", err.line}, {"reason", err.reason}}.dump() + "\n";
            }
            write_text_file((fs::path(out_dir) / ingest::sensor_file_name(kind)).string(),
                            ingest::events_to_csv(parsed.events, kind));
            outputs.push_back(ingest::sensor_file_name(kind));
            streams.push_back(std::move(parsed.events));
        }
        const auto merged = ingest::merge_streams(std::move(streams));
        windows = ingest::segment_days(merged, cfg.utc_offset_minutes);
    }
    write_text_file((fs::path(out_dir) / "errors.jsonl").string(), errors_jsonl);
    outputs.push_back("errors.jsonl");

    {
        CsvWriter w((fs::path(out_dir) / "coverage.csv").string(), {"participant_id", "sensor", "days_with_data"});
        for (const auto& row : ingest::coverage_report(windows)) {
            w.write_row({row.participant_id, ingest::sensor_kind_name(row.kind),
                         format_int(static_cast<std::int64_t>(row.days_with_data))});
        }
        w.close();
        outputs.push_back("coverage.csv");
    }
    write_manifest(out_dir, "ingest", cfg, inputs, outputs, timer.elapsed_ms());
}

void stage_extract(const RunConfig& cfg, const std::string& events_dir, const std::string& out_dir) {
    StageTimer timer;
    fs::create_directories(out_dir);
    std::vector<std::string> inputs;
    std::vector<std::vector<ingest::SensorEvent>> streams;
    for (int k = 0; k < ingest::kNumSensorKinds; ++k) {
        const auto kind = static_cast<ingest::SensorKind>(k);
        const auto path = (fs::path(events_dir) / ingest::sensor_file_name(kind)).string();
        require_file(path);
        inputs.push_back(path);
        streams.push_back(ingest::parse_sensor_file(path, kind).events);
    }
    const auto merged = ingest::merge_streams(std::move(streams));
    const auto windows = ingest::segment_days(merged, cfg.utc_offset_minutes);

    features::FeatureConfig fc = cfg.feature_cfg;
    fc.utc_offset_minutes = cfg.utc_offset_minutes;
    const auto extracted = features::extract_features(windows, fc, cfg.jobs);

    features::write_daily_csv((fs::path(out_dir) / "features_daily.csv").string(), extracted.daily);
    features::write_participant_csv((fs::path(out_dir) / "features_participant.csv").string(),
                                    extracted.participants);
    write_manifest(out_dir, "extract", cfg, inputs, {"features_daily.csv", "features_participant.csv"},
                   timer.elapsed_ms());
}

void stage_label(const RunConfig& cfg, const std::string& ucla_csv, const std::string& out_dir) {
    StageTimer timer;
    fs::create_directories(out_dir);
    const auto parsed = labeling::load_ucla_csv(require_file(ucla_csv));
    labeling::write_labels_csv((fs::path(out_dir) / "labels.csv").string(), parsed.assessments);
    std::string rejects;
    for (const auto& [line, reason] : parsed.rejected) {
        rejects += json{{"file", ucla_csv}, {"line", line}, {"reason", reason}}.dump() + "\n";
    }
    write_text_file((fs::path(out_dir) / "rejected.jsonl").string(), rejects);
    write_manifest(out_dir, "label", cfg, {ucla_csv}, {"labels.csv", "rejected.jsonl"}, timer.elapsed_ms(),
                   json{{"rejected_rows", parsed.rejected.size()}});
}

void stage_stats(const RunConfig& cfg, const std::string& features_csv, const std::string& labels_csv,
                 const std::string& out_dir) {
    StageTimer timer;
    fs::create_directories(out_dir);
    const auto data = load_labeled_features(features_csv, labels_csv);

    std::vector<bool> in_sl, in_el;
    std::size_t n_sl = 0, n_el = 0;
    for (int label : data.y) {
        const bool sl = label == static_cast<int>(labeling::Category::SociallyLonely);
        const bool el = label == static_cast<int>(labeling::Category::EmotionallyLonely);
        in_sl.push_back(sl);
        in_el.push_back(el);
        n_sl += sl ? 1 : 0;
        n_el += el ? 1 : 0;
    }
    if (n_sl < 2 || n_el < 2) {
        throw ValidationError("group too small for bootstrap: socially_lonely n=" + std::to_string(n_sl) +
                              ", emotionally_lonely n=" + std::to_string(n_el));
    }

    stats::CompareOptions opts;
    opts.resamples = cfg.stats_resamples;
    opts.seed = cfg.seed;
    opts.bonferroni = cfg.bonferroni;
    const auto rows = stats::compare_groups(data.x.col_names, data.x.data, in_sl, in_el, opts);
    stats::write_group_comparison_csv((fs::path(out_dir) / "group_comparison.csv").string(), rows);
    write_manifest(out_dir, "stats", cfg, {features_csv, labels_csv}, {"group_comparison.csv"},
                   timer.elapsed_ms(), json{{"n_socially_lonely", n_sl}, {"n_emotionally_lonely", n_el}});
}

namespace {

models::Hyper default_point(const eval::RosterEntry& entry) {
    const auto space = eval::expand_grid(entry.grid);
    return space.points.empty() ? models::Hyper{} : space.points.front();
}

}  // namespace

void stage_train(const RunConfig& cfg, const std::string& features_csv, const std::string& labels_csv,
                 const std::string& out_dir) {
    StageTimer timer;
    fs::create_directories(out_dir);
    const auto data = load_labeled_features(features_csv, labels_csv);
    std::vector<std::string> outputs;
    for (std::size_t m = 0; m < cfg.roster.size(); ++m) {
        const auto& entry = cfg.roster[m];
        auto model = models::make_classifier(entry.model);
        auto prep = cfg.eval_cfg.prep;
        if (model->models_class_prior()) prep.smote_enabled = false;
        const auto prepared =
            eval::prepare_training(data.x, data.y, labeling::kNumCategories, model->needs_scaled_features(),
                                   prep, derive_seed(cfg.seed, {0x7EA14u, m}));
        model->fit(prepared.x, prepared.y, labeling::kNumCategories, default_point(entry),
                   derive_seed(cfg.seed, {0x7EA15u, m}));
        json j = model->to_json();
        j["feature_names"] = data.x.col_names;
        const std::string name = entry.model + ".json";
        write_text_file((fs::path(out_dir) / name).string(), j.dump() + "\n");
        outputs.push_back(name);
    }
    write_manifest(out_dir, "train", cfg, {features_csv, labels_csv}, outputs, timer.elapsed_ms());
}

void stage_evaluate(const RunConfig& cfg, const std::string& features_csv, const std::string& labels_csv,
                    const std::string& out_dir) {
    StageTimer timer;
    fs::create_directories(out_dir);
    const auto data = load_labeled_features(features_csv, labels_csv);

    eval::LoocvConfig eval_cfg = cfg.eval_cfg;
    if (cfg.dump_preprocessed) eval_cfg.dump_dir = (fs::path(out_dir) / "preprocessed").string();
    const auto benchmark = eval::run_benchmark(data.x, data.y, labeling::kNumCategories, cfg.roster,
                                               eval_cfg, cfg.seed, cfg.jobs);

    std::vector<std::string> class_names;
    for (int c = 0; c < labeling::kNumCategories; ++c) {
        class_names.push_back(labeling::category_name(static_cast<labeling::Category>(c)));
    }

    {
        std::vector<std::string> header = {"model", "participant", "true", "predicted"};
        for (const auto& c : class_names) header.push_back("score_" + c);
        CsvWriter w((fs::path(out_dir) / "predictions.csv").string(), header);
        for (const auto& bench : benchmark) {
            for (const auto& f : bench.folds) {
                std::vector<std::string> row = {
                    bench.model, f.participant_id,
                    labeling::category_name(static_cast<labeling::Category>(f.true_label)),
                    labeling::category_name(static_cast<labeling::Category>(f.predicted))};
                for (double s : f.scores) row.push_back(format_double(s));
                w.write_row(row);
            }
        }
        w.close();
    }
    {
        std::string folds_jsonl;
        for (const auto& bench : benchmark) {
            for (const auto& f : bench.folds) {
                json hp = json::object();
                for (const auto& [k, v] : f.chosen) hp[k] = v;
                folds_jsonl += json{{"model", bench.model},
                                    {"participant", f.participant_id},
                                    {"fold_seed", f.fold_seed},
                                    {"chosen_hyperparameters", std::move(hp)},
                                    {"stratification_degraded", f.stratification_degraded}}
                                   .dump() +
                               "\n";
            }
        }
        write_text_file((fs::path(out_dir) / "fold_details.jsonl").string(), folds_jsonl);
    }
    {
        json metrics = json::object();
        for (const auto& bench : benchmark) {
            json per_class = json::object();
            for (std::size_t c = 0; c < bench.metrics.per_class.size(); ++c) {
                const auto& cm = bench.metrics.per_class[c];
                per_class[class_names[c]] = json{{"precision", cm.precision_pct},
                                                 {"recall", cm.recall_pct},
                                                 {"f1", cm.f1_pct},
                                                 {"support", cm.support}};
            }
            metrics[bench.model] = json{{"accuracy", bench.metrics.accuracy_pct},
                                        {"n", bench.metrics.n},
                                        {"per_class", std::move(per_class)},
                                        {"confusion", bench.metrics.confusion}};
        }
        write_text_file((fs::path(out_dir) / "metrics.json").string(), metrics.dump(2) + "\n");
    }
    write_text_file((fs::path(out_dir) / "classification_table.md").string(),
                    eval::classification_table_markdown(benchmark, class_names));
    write_manifest(out_dir, "evaluate", cfg, {features_csv, labels_csv},
                   {"predictions.csv", "fold_details.jsonl", "metrics.json", "classification_table.md"},
                   timer.elapsed_ms());
}

void stage_explain(const RunConfig& cfg, const std::string& features_csv, const std::string& labels_csv,
                   const std::string& out_dir) {
    StageTimer timer;
    fs::create_directories(out_dir);
    const auto data = load_labeled_features(features_csv, labels_csv);
    const std::size_t n = data.x.n_rows();

    std::vector<std::string> class_names;
    for (int c = 0; c < labeling::kNumCategories; ++c) {
        class_names.push_back(labeling::category_name(static_cast<labeling::Category>(c)));
    }

    std::vector<std::string> outputs;
    for (const auto& model_name : cfg.explain_models) {
        models::Hyper hp;
        for (const auto& entry : cfg.roster) {
            if (entry.model == model_name) hp = default_point(entry);
        }

        // per-fold SHAP on each held-out participant, pooled; fold seeds match
        // the evaluation stage so single-point grids reuse identical models
        explain::ShapMatrix pooled;
        pooled.model_name = model_name;
        pooled.feature_names = data.x.col_names;
        pooled.values.resize(n);
        std::vector<double> residuals(n, 0.0);

        parallel_for(n, cfg.jobs, [&](std::size_t p) {
            const std::uint64_t fold_seed = derive_seed(cfg.seed, {0xF01Du, p});
            std::vector<std::size_t> train_idx;
            train_idx.reserve(n - 1);
            for (std::size_t i = 0; i < n; ++i) {
                if (i != p) train_idx.push_back(i);
            }
            Matrix x_tr = data.x.select_rows(train_idx);
            std::vector<int> y_tr;
            for (std::size_t i : train_idx) y_tr.push_back(data.y[i]);

            auto probe = models::make_classifier(model_name);
            const auto prepared =
                eval::prepare_training(x_tr, y_tr, labeling::kNumCategories, probe->needs_scaled_features(),
                                       cfg.eval_cfg.prep, derive_seed(fold_seed, {0x5307Eu}));
            probe->fit(prepared.x, prepared.y, labeling::kNumCategories, hp,
                       derive_seed(fold_seed, {0x30DE1u}));

            // serialization round trip: explanations run off the JSON form
            auto model = models::classifier_from_json(probe->to_json());

            Matrix x_test;
            x_test.col_names = data.x.col_names;
            x_test.data.push_back(eval::transform_row(prepared.plans, data.x.data[p]));
            auto shap = explain::ensemble_shap(*model, x_test, 1);
            residuals[p] = shap.max_additivity_residual;
            pooled.values[p] = std::move(shap.values.front());
        });
        for (double r : residuals) pooled.max_additivity_residual = std::max(pooled.max_additivity_residual, r);

        const auto ranking = explain::rank_features(pooled);
        const std::string shap_csv = "shap_values_" + model_name + ".csv";
        const std::string importance_csv = "importance_" + model_name + ".csv";
        const std::string summary_md = "shap_summary_" + model_name + ".md";
        explain::write_shap_values_csv((fs::path(out_dir) / shap_csv).string(), pooled, data.ids, class_names);
        explain::write_importance_csv((fs::path(out_dir) / importance_csv).string(), ranking, class_names);
        const std::string space_note = model_name == "gbt" ? " (margin space)" : " (probability space)";
        write_text_file((fs::path(out_dir) / summary_md).string(),
                        explain::importance_markdown(model_name + space_note, ranking, class_names,
                                                     cfg.explain_top_k));
        outputs.push_back(shap_csv);
        outputs.push_back(importance_csv);
        outputs.push_back(summary_md);
    }
    write_manifest(out_dir, "explain", cfg, {features_csv, labels_csv}, outputs, timer.elapsed_ms());
}

void stage_report(const RunConfig& cfg, const std::string& out_root) {
    StageTimer timer;
    const auto report_dir = (fs::path(out_root) / "report").string();
    fs::create_directories(report_dir);
    std::vector<std::string> inputs, outputs;

    const auto labels_csv = (fs::path(out_root) / "labels" / "labels.csv").string();
    if (fs::exists(labels_csv)) {
        inputs.push_back(labels_csv);
        const auto assessments = labeling::load_labels_csv(labels_csv);
        const auto summary = labeling::cohort_summary(assessments);
        std::string md = "# Cohort loneliness descriptives\n\n";
        md += "n = " + std::to_string(summary.n) + "\n\n";
        md += "| scale | mean | median | Q1 | Q3 | SD |\n|---|---:|---:|---:|---:|---:|\n";
        const auto stat_row = [](const char* label, const labeling::ScoreStats& s) {
            std::string row = std::string("| ") + label + " | ";
            row += format_double(round_half_up(s.mean, 2)) + " | " + format_double(s.median) + " | " +
                   format_double(s.q1) + " | " + format_double(s.q3) + " | " +
                   format_double(round_half_up(s.sd, 3)) + " |\n";
            return row;
        };
        md += stat_row("total", summary.total);
        md += stat_row("social", summary.social);
        md += stat_row("emotional", summary.emotional);
        md += "\n| category | count | percent |\n|---|---:|---:|\n";
        for (int c = 0; c < labeling::kNumCategories; ++c) {
            md += std::string("| ") + labeling::category_name(static_cast<labeling::Category>(c)) + " | " +
                  std::to_string(summary.category_counts[static_cast<std::size_t>(c)]) + " | " +
                  format_double(summary.category_percent[static_cast<std::size_t>(c)]) + " |\n";
        }
        md += "| low (<=20) | " + std::to_string(summary.low_count) + " | " + format_double(summary.low_percent) +
              " |\n";
        md += "| high (>20) | " + std::to_string(summary.high_count) + " | " + format_double(summary.high_percent) +
              " |\n";
        write_text_file((fs::path(report_dir) / "descriptives.md").string(), md);
        outputs.push_back("descriptives.md");
    }

    const auto comparison_csv = (fs::path(out_root) / "stats" / "group_comparison.csv").string();
    if (fs::exists(comparison_csv)) {
        inputs.push_back(comparison_csv);
        CsvReader reader = CsvReader::open(comparison_csv);
        std::string md = "# Socially vs emotionally lonely: biomarker comparison\n\n|";
        for (const auto& h : reader.header()) md += " " + h + " |";
        md += "\n|";
        for (std::size_t i = 0; i < reader.header().size(); ++i) md += "---|";
        md += "\n";
        std::vector<std::string_view> fields;
        while (reader.next_row(fields)) {
            md += "|";
            for (auto f : fields) md += " " + std::string(f) + " |";
            md += "\n";
        }
        write_text_file((fs::path(report_dir) / "group_comparison.md").string(), md);
        outputs.push_back("group_comparison.md");
    }

    const auto table_md = (fs::path(out_root) / "eval" / "classification_table.md").string();
    if (fs::exists(table_md)) {
        inputs.push_back(table_md);
        write_text_file((fs::path(report_dir) / "classification_table.md").string(),
                        "# Classification performance (LOOCV)\n\n" + read_text_file(table_md));
        outputs.push_back("classification_table.md");
    }

    for (const auto& model_name : cfg.explain_models) {
        const auto src = (fs::path(out_root) / "explain" / ("shap_summary_" + model_name + ".md")).string();
        if (fs::exists(src)) {
            inputs.push_back(src);
            const std::string name = "shap_summary_" + model_name + ".md";
            write_text_file((fs::path(report_dir) / name).string(), read_text_file(src));
            outputs.push_back(name);
        }
    }
    write_manifest(report_dir, "report", cfg, inputs, outputs, timer.elapsed_ms());
}

void run_pipeline(const RunConfig& cfg, const std::string& raw_dir, const std::string& out_root) {
    const fs::path root(out_root);
    stage_ingest(cfg, raw_dir, (root / "ingest").string());
    stage_extract(cfg, (root / "ingest").string(), (root / "features").string());
    stage_label(cfg, (fs::path(raw_dir) / "ucla_post.csv").string(), (root / "labels").string());
    const auto features_csv = (root / "features" / "features_participant.csv").string();
    const auto labels_csv = (root / "labels" / "labels.csv").string();
    stage_stats(cfg, features_csv, labels_csv, (root / "stats").string());
    stage_train(cfg, features_csv, labels_csv, (root / "models").string());
    stage_evaluate(cfg, features_csv, labels_csv, (root / "eval").string());
    stage_explain(cfg, features_csv, labels_csv, (root / "explain").string());
    stage_report(cfg, out_root);
}

}  // namespace biomlab::pipeline
