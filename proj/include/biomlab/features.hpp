#pragma once

#include <string>
#include <vector>

#include "biomlab/common.hpp"
#include "biomlab/ingest.hpp"

namespace biomlab::features {

// Canonical daily feature order; all CSV columns and vector layouts follow it.
enum DailyFeature : int {
    kLocVariance = 0,
    kLocLogVariance,
    kLocTotalDistanceM,
    kLocRadiusGyrationM,
    kLocNumSignificantPlaces,
    kLocNumTransitions,
    kLocEntropy,
    kLocNormalizedEntropy,
    kLocMaxStayAtClusterMin,
    kLocTimeAtTopClusterMin,
    kLocAvgSpeedMps,
    kPhoneCountEpisodes,
    kPhoneSumDurationMin,
    kPhoneMaxDurationMin,
    kPhoneAvgDurationMin,
    kPhoneStdDurationMin,
    kPhoneFirstUseAfterWakeMin,
    kBtCountScans,
    kBtUniqueDevices,
    kCallMissedCount,
    kCallUniqueContacts,
    kStepsSum,
    kStepsMaxInterval,
    kStepsAvgInterval,
    kStepsStdInterval,
    kSleepSumAsleepMin,
    kSleepSumAwakeMin,
    kSleepAvgEfficiency,
    kSleepAvgInBedMin,
    kNumDailyFeatures
};

const std::vector<std::string>& daily_feature_names();

// Participant-level names: <feature>_mean, <feature>_std interleaved in
// canonical order (58 entries).
const std::vector<std::string>& participant_feature_names();

struct FeatureConfig {
    int utc_offset_minutes = 0;       // must match the segmentation offset
    double cluster_eps_m = 30.0;
    int cluster_min_samples = 10;
    double glance_pairing_s = 30.0;   // `on` without `unlock` within this window is a glance
    double occupancy_cap_min = 10.0;  // per-side cap on the half-interval a fix carries
};

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

// Great-circle distance in meters, spherical Earth R = 6371000 m.
double haversine_m(double lat1, double lon1, double lat2, double lon2);

// Density-based significant places over a participant's full study period.
// Core point: >= min_samples fixes (self included) within eps meters.
struct SignificantPlaces {
    double eps_m = 30.0;
    int min_samples = 10;
    std::vector<LatLon> centroids;        // one per cluster, discovery order
    std::vector<int> fit_labels;          // label per input fix, -1 = noise

    int cluster_count() const { return static_cast<int>(centroids.size()); }
    // Nearest centroid within eps, else -1.
    int label(double lat, double lon) const;
};

SignificantPlaces fit_significant_places(const std::vector<LatLon>& fixes, double eps_m, int min_samples);

struct DailyFeatureRow {
    std::string participant_id;
    CivilDate local_date;
    std::size_t n_events = 0;  // events of any kind in the window
    std::size_t unclosed_episodes = 0;
    std::vector<double> values;  // kNumDailyFeatures entries, NaN = missing
};

// Computes the full daily catalogue for one window. `places` may be null when
// the participant has no location fixes at all; location features then stay
// missing. Windows may mix sensor kinds; each extractor filters its own.
DailyFeatureRow compute_daily_features(const ingest::DayWindow& window, const SignificantPlaces* places,
                                       const FeatureConfig& config);

struct ParticipantVector {
    std::string participant_id;
    std::size_t days_observed = 0;          // windows with at least one event
    std::vector<double> mean;               // per daily feature, NaN if never observed
    std::vector<double> stddev;             // population std over non-missing days
    std::vector<double> flat() const;       // interleaved mean/std, participant_feature_names() order
};

ParticipantVector aggregate_participant(const std::vector<DailyFeatureRow>& rows);

// Full extraction: fit significant places per participant, compute daily rows
// for every window, aggregate. Windows must be grouped by participant.
struct ExtractionResult {
    std::vector<DailyFeatureRow> daily;
    std::vector<ParticipantVector> participants;
};
ExtractionResult extract_features(const std::vector<ingest::DayWindow>& windows, const FeatureConfig& config,
                                  unsigned jobs);

void write_daily_csv(const std::string& path, const std::vector<DailyFeatureRow>& rows);
void write_participant_csv(const std::string& path, const std::vector<ParticipantVector>& vectors);

struct ParticipantTable {
    std::vector<std::string> participant_ids;
    std::vector<std::size_t> days_observed;
    std::vector<std::vector<double>> rows;  // 58 columns, participant_feature_names() order
};
ParticipantTable load_participant_csv(const std::string& path);

}  // namespace biomlab::features
