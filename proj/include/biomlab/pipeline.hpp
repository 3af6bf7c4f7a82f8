#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "biomlab/eval.hpp"
#include "biomlab/features.hpp"
#include "biomlab/synthcohort.hpp"

namespace biomlab::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kPrngId = "xoshiro256++ / splitmix64-derived substreams";

struct RunConfig {
    std::uint64_t seed = 1;
    unsigned jobs = 0;  // 0 = hardware concurrency
    int utc_offset_minutes = -420;
    features::FeatureConfig feature_cfg;  // utc_offset_minutes mirrored in
    std::size_t stats_resamples = 10000;
    bool bonferroni = false;
    eval::LoocvConfig eval_cfg;
    std::vector<eval::RosterEntry> roster;
    std::vector<std::string> explain_models = {"gbt", "random_forest"};
    std::size_t explain_top_k = 15;
    synth::CohortConfig synth_cfg;
    bool dump_preprocessed = false;
    nlohmann::json raw;  // merged config document (defaults + file + flags)

    static RunConfig defaults();
};

// Loads the JSON config file over defaults; an empty path keeps defaults.
RunConfig load_config(const std::string& path);
nlohmann::json config_to_json(const RunConfig& cfg);

// Stage entry points. Each writes its artifacts plus a manifest.json with the
// tool version, seeds, PRNG id, effective parameters, input and output
// digests, and timings.
void stage_synth(const RunConfig& cfg, const std::string& out_dir);
void stage_ingest(const RunConfig& cfg, const std::string& raw_dir, const std::string& out_dir);
void stage_extract(const RunConfig& cfg, const std::string& events_dir, const std::string& out_dir);
void stage_label(const RunConfig& cfg, const std::string& ucla_csv, const std::string& out_dir);
void stage_stats(const RunConfig& cfg, const std::string& features_csv, const std::string& labels_csv,
                 const std::string& out_dir);
void stage_train(const RunConfig& cfg, const std::string& features_csv, const std::string& labels_csv,
                 const std::string& out_dir);
void stage_evaluate(const RunConfig& cfg, const std::string& features_csv, const std::string& labels_csv,
                    const std::string& out_dir);
void stage_explain(const RunConfig& cfg, const std::string& features_csv, const std::string& labels_csv,
                   const std::string& out_dir);
void stage_report(const RunConfig& cfg, const std::string& out_root);

// ingest -> extract -> label -> stats -> train -> evaluate -> explain -> report
// under out_root, reading raw sensor CSVs from raw_dir.
void run_pipeline(const RunConfig& cfg, const std::string& raw_dir, const std::string& out_root);

// Joined view of features_participant.csv and labels.csv (participants sorted
// by id; rows without a label are dropped).
struct LabeledFeatures {
    Matrix x;                       // participant_feature_names() columns
    std::vector<int> y;             // category indices
    std::vector<std::string> ids;
};
LabeledFeatures load_labeled_features(const std::string& features_csv, const std::string& labels_csv);

}  // namespace biomlab::pipeline
