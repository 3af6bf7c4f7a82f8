#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "biomlab/labeling.hpp"

namespace biomlab::synth {

// Per-category generative behavior. Defaults plant the socially-vs-emotionally
// lonely contrasts reported for this kind of cohort (SL lower phone use,
// mobility, Bluetooth exposure and steps; more sleep) while keeping all four
// categories separable for the classifiers.
struct CategoryParams {
    double phone_min_per_day = 450.0;
    double episodes_per_day = 15.0;
    double first_use_after_wake_min = 20.0;
    int cluster_count = 4;
    double hop_rate = 0.05;          // per-fix probability of moving to another cluster
    double cluster_spread_m = 1500.0;
    int bt_pool = 8;
    double bt_scans_per_day = 35.0;
    double steps_per_day = 6000.0;
    double steps_daily_sd = 600.0;
    double sleep_asleep_min = 420.0;
    double sleep_awake_min = 80.0;
    double calls_per_day = 2.0;
    double missed_call_frac = 0.3;
    int contact_pool = 6;
    int social_lo = 6, social_hi = 10;        // UCLA subscale targets
    int emotional_lo = 6, emotional_hi = 10;
};

struct CohortConfig {
    std::array<int, labeling::kNumCategories> n_per_category = {24, 19, 87, 75};
    int days = 70;
    int utc_offset_minutes = -420;
    std::uint64_t seed = 1;
    double noise_scale = 1.0;    // scales all per-day noise; 0 degenerates to exact means
    double between_scale = 1.0;  // scales between-participant heterogeneity
    std::array<CategoryParams, labeling::kNumCategories> categories;

    CohortConfig();
};

CohortConfig cohort_config_from_json(const nlohmann::json& j);
nlohmann::json cohort_config_to_json(const CohortConfig& cfg);

struct PlantedFeature {
    std::string feature;  // participant-level feature name
    int sign = 0;         // expected sign of mean(SL) - mean(EL)
};

struct GroundTruthManifest {
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, labeling::Category>> participants;  // sorted by id
    std::vector<PlantedFeature> planted;
    std::string dominant_feature;
    labeling::Category driven_class = labeling::Category::SociallyLonely;
    nlohmann::json config_echo;
};

nlohmann::json manifest_to_json(const GroundTruthManifest& m);
GroundTruthManifest manifest_from_json(const nlohmann::json& j);

// Writes the six sensor CSVs plus ucla_post.csv and manifest.json into
// out_dir; byte-deterministic for a fixed config. Throws when a category's
// UCLA target range is infeasible.
GroundTruthManifest generate(const CohortConfig& cfg, const std::string& out_dir);

// Back-solves the lexicographically smallest raw response vector hitting the
// two subscale targets (each in 5..20).
std::array<int, 10> backsolve_ucla(int social_target, int emotional_target);

struct PlantCheck {
    std::string feature;
    int expected_sign = 0;
    double mean_diff = 0.0;
    double p = 1.0;
    bool pass = false;
};

struct PlantReport {
    std::size_t label_mismatches = 0;
    std::vector<PlantCheck> checks;
    bool all_passed() const;
};

// Runs ingest -> features -> labeling -> stats end-to-end over generated raw
// files and verifies every planted SL-vs-EL difference is recovered with the
// right sign at p < 0.05.
PlantReport verify_plant(const std::string& raw_dir, const GroundTruthManifest& manifest,
                         const CohortConfig& cfg, unsigned jobs);

}  // namespace biomlab::synth
