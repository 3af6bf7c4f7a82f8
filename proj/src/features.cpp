#include "biomlab/features.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "biomlab/csv.hpp"
#include "biomlab/parallel.hpp"

namespace biomlab::features {

namespace {

constexpr double kEarthRadiusM = 6371000.0;
constexpr double kDegToRad = 0.017453292519943295;

}  // namespace

const std::vector<std::string>& daily_feature_names() {
    static const std::vector<std::string> names = {
        "loc_variance",
        "loc_log_variance",
        "loc_total_distance_m",
        "loc_radius_gyration_m",
        "loc_num_significant_places",
        "loc_num_transitions",
        "loc_entropy",
        "loc_normalized_entropy",
        "loc_max_stay_at_cluster_min",
        "loc_time_at_top_cluster_min",
        "loc_avg_speed_mps",
        "phone_count_episodes",
        "phone_sum_duration_min",
        "phone_max_duration_min",
        "phone_avg_duration_min",
        "phone_std_duration_min",
        "phone_first_use_after_wake_min",
        "bt_count_scans",
        "bt_unique_devices",
        "call_missed_count",
        "call_unique_contacts",
        "steps_sum",
        "steps_max_interval",
        "steps_avg_interval",
        "steps_std_interval",
        "sleep_sum_asleep_min",
        "sleep_sum_awake_min",
        "sleep_avg_efficiency",
        "sleep_avg_in_bed_min",
    };
    return names;
}

const std::vector<std::string>& participant_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        out.reserve(2 * daily_feature_names().size());
        for (const auto& f : daily_feature_names()) {
            out.push_back(f + "_mean");
            out.push_back(f + "_std");
        }
        return out;
    }();
    return names;
}

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    const double phi1 = lat1 * kDegToRad;
    const double phi2 = lat2 * kDegToRad;
    const double dphi = (lat2 - lat1) * kDegToRad;
    const double dlam = (lon2 - lon1) * kDegToRad;
    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    const double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

int SignificantPlaces::label(double lat, double lon) const {
    int best = -1;
    double best_d = eps_m;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = haversine_m(lat, lon, centroids[c].lat, centroids[c].lon);
        if (d <= best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

namespace {

// Grid over (lat, lon) degrees with eps-sized cells; 3x3 neighborhoods bound
// the haversine checks.
struct FixGrid {
    double cell_lat;
    double cell_lon;
    std::unordered_map<std::int64_t, std::vector<int>> cells;

    FixGrid(const std::vector<LatLon>& fixes, double eps_m) {
        cell_lat = eps_m / 111320.0;
        double max_abs_lat = 0.0;
        for (const auto& f : fixes) max_abs_lat = std::max(max_abs_lat, std::abs(f.lat));
        const double cos_lat = std::max(0.01, std::cos(std::min(89.0, max_abs_lat) * kDegToRad));
        cell_lon = eps_m / (111320.0 * cos_lat);
        for (int i = 0; i < static_cast<int>(fixes.size()); ++i) {
            cells[key_of(fixes[static_cast<std::size_t>(i)])].push_back(i);
        }
    }

    std::int64_t key_of(const LatLon& f) const {
        const auto gx = static_cast<std::int64_t>(std::floor(f.lat / cell_lat));
        const auto gy = static_cast<std::int64_t>(std::floor(f.lon / cell_lon));
        return gx * 2000003 + gy;
    }

    template <typename Visit>
    void for_candidates(const LatLon& f, Visit&& visit) const {
        const auto gx = static_cast<std::int64_t>(std::floor(f.lat / cell_lat));
        const auto gy = static_cast<std::int64_t>(std::floor(f.lon / cell_lon));
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                const auto it = cells.find((gx + dx) * 2000003 + gy + dy);
                if (it == cells.end()) continue;
                for (int idx : it->second) visit(idx);
            }
        }
    }
};

}  // namespace

SignificantPlaces fit_significant_places(const std::vector<LatLon>& fixes, double eps_m, int min_samples) {
    if (fixes.empty()) throw ValidationError("fit_significant_places requires at least one fix");
    SignificantPlaces out;
    out.eps_m = eps_m;
    out.min_samples = min_samples;

    const int n = static_cast<int>(fixes.size());
    FixGrid grid(fixes, eps_m);

    auto neighbors_of = [&](int i, std::vector<int>& buf) {
        buf.clear();
        const LatLon& f = fixes[static_cast<std::size_t>(i)];
        grid.for_candidates(f, [&](int j) {
            if (haversine_m(f.lat, f.lon, fixes[static_cast<std::size_t>(j)].lat,
                            fixes[static_cast<std::size_t>(j)].lon) <= eps_m) {
                buf.push_back(j);
            }
        });
    };

    out.fit_labels.assign(static_cast<std::size_t>(n), -1);
    std::vector<char> visited(static_cast<std::size_t>(n), 0);
    std::vector<int> nbuf, nbuf2;
    int next_cluster = 0;

    for (int i = 0; i < n; ++i) {
        if (visited[static_cast<std::size_t>(i)]) continue;
        visited[static_cast<std::size_t>(i)] = 1;
        neighbors_of(i, nbuf);
        if (static_cast<int>(nbuf.size()) < min_samples) continue;  // not core; may become border later

        const int cluster = next_cluster++;
        out.fit_labels[static_cast<std::size_t>(i)] = cluster;
        std::deque<int> frontier(nbuf.begin(), nbuf.end());
        while (!frontier.empty()) {
            const int j = frontier.front();
            frontier.pop_front();
            if (out.fit_labels[static_cast<std::size_t>(j)] == -1) {
                out.fit_labels[static_cast<std::size_t>(j)] = cluster;  // border or core member
            }
            if (visited[static_cast<std::size_t>(j)]) continue;
            visited[static_cast<std::size_t>(j)] = 1;
            neighbors_of(j, nbuf2);
            if (static_cast<int>(nbuf2.size()) >= min_samples) {
                for (int k : nbuf2) frontier.push_back(k);
            }
        }
    }

    out.centroids.assign(static_cast<std::size_t>(next_cluster), LatLon{});
    std::vector<std::size_t> counts(static_cast<std::size_t>(next_cluster), 0);
    for (int i = 0; i < n; ++i) {
        const int c = out.fit_labels[static_cast<std::size_t>(i)];
        if (c < 0) continue;
        out.centroids[static_cast<std::size_t>(c)].lat += fixes[static_cast<std::size_t>(i)].lat;
        out.centroids[static_cast<std::size_t>(c)].lon += fixes[static_cast<std::size_t>(i)].lon;
        ++counts[static_cast<std::size_t>(c)];
    }
    for (std::size_t c = 0; c < out.centroids.size(); ++c) {
        out.centroids[c].lat /= static_cast<double>(counts[c]);
        out.centroids[c].lon /= static_cast<double>(counts[c]);
    }
    return out;
}

namespace {

struct TimedFix {
    std::int64_t ts;
    LatLon pos;
};

void location_features(const std::vector<TimedFix>& fixes, const SignificantPlaces* places,
                       const FeatureConfig& cfg, std::vector<double>& v) {
    if (fixes.empty() || places == nullptr) return;
    const std::size_t n = fixes.size();

    std::vector<double> lats(n), lons(n);
    for (std::size_t i = 0; i < n; ++i) {
        lats[i] = fixes[i].pos.lat;
        lons[i] = fixes[i].pos.lon;
    }
    const double variance = population_variance(lats) + population_variance(lons);
    v[kLocVariance] = variance;
    v[kLocLogVariance] = variance > 0.0 ? std::log(variance) : kMissing;

    double total_dist = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        total_dist += haversine_m(lats[i - 1], lons[i - 1], lats[i], lons[i]);
    }
    v[kLocTotalDistanceM] = total_dist;

    const double clat = mean_of(lats), clon = mean_of(lons);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = haversine_m(lats[i], lons[i], clat, clon);
        sq += d * d;
    }
    v[kLocRadiusGyrationM] = std::sqrt(sq / static_cast<double>(n));

    const double elapsed_s = static_cast<double>(fixes.back().ts - fixes.front().ts) / 1000.0;
    v[kLocAvgSpeedMps] = elapsed_s > 0.0 ? total_dist / elapsed_s : kMissing;

    // Cluster occupancy: each fix carries half the gap to each neighbor,
    // capped per side; if all gaps are zero, fall back to per-fix counts.
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = places->label(lats[i], lons[i]);

    std::vector<double> weight(n, 0.0);
    const double cap = cfg.occupancy_cap_min;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double gap_min = static_cast<double>(fixes[i].ts - fixes[i - 1].ts) / 60000.0;
            weight[i] += std::min(gap_min / 2.0, cap);
        }
        if (i + 1 < n) {
            const double gap_min = static_cast<double>(fixes[i + 1].ts - fixes[i].ts) / 60000.0;
            weight[i] += std::min(gap_min / 2.0, cap);
        }
    }
    if (std::accumulate(weight.begin(), weight.end(), 0.0) <= 0.0) {
        std::fill(weight.begin(), weight.end(), 1.0);
    }

    std::map<int, double> occupancy;  // cluster -> minutes
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= 0) occupancy[labels[i]] += weight[i];
    }

    int transitions = 0;
    int prev = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0) continue;
        if (prev >= 0 && labels[i] != prev) ++transitions;
        prev = labels[i];
    }

    double max_stay = 0.0;
    std::size_t i = 0;
    while (i < n) {
        if (labels[i] < 0) {
            ++i;
            continue;
        }
        double run = 0.0;
        const int lbl = labels[i];
        while (i < n && labels[i] == lbl) {
            run += weight[i];
            ++i;
        }
        max_stay = std::max(max_stay, run);
    }

    v[kLocNumSignificantPlaces] = static_cast<double>(occupancy.size());
    v[kLocNumTransitions] = transitions;
    v[kLocMaxStayAtClusterMin] = max_stay;

    double top_time = 0.0;
    double total_time = 0.0;
    for (const auto& [c, t] : occupancy) {
        top_time = std::max(top_time, t);
        total_time += t;
    }
    v[kLocTimeAtTopClusterMin] = top_time;

    if (n < 2) {
        // single fix: dispersion is zero but time-distribution entropy is undefined
        v[kLocEntropy] = kMissing;
        v[kLocNormalizedEntropy] = kMissing;
        return;
    }
    if (occupancy.empty()) {
        v[kLocEntropy] = 0.0;  // all-noise day
        v[kLocNormalizedEntropy] = 0.0;
        return;
    }
    if (occupancy.size() == 1 || total_time <= 0.0) {
        v[kLocEntropy] = 0.0;
        v[kLocNormalizedEntropy] = 0.0;
        return;
    }
    double entropy = 0.0;
    for (const auto& [c, t] : occupancy) {
        if (t <= 0.0) continue;
        const double p = t / total_time;
        entropy -= p * std::log(p);
    }
    v[kLocEntropy] = entropy;
    v[kLocNormalizedEntropy] = entropy / std::log(static_cast<double>(occupancy.size()));
}

struct ScreenedEvent {
    std::int64_t ts;
    ingest::ScreenState state;
};

void phone_features(const std::vector<ScreenedEvent>& screen, const std::vector<ingest::SleepPayload>& sleeps,
                    std::int64_t window_start_ms, std::int64_t window_end_ms, const FeatureConfig& cfg,
                    std::vector<double>& v, std::size_t& unclosed) {
    using ingest::ScreenState;
    std::vector<double> durations_min;
    std::int64_t episode_start = -1;
    std::int64_t pending_on = -1;
    std::int64_t first_unlock_ts = -1;
    const auto pairing_ms = static_cast<std::int64_t>(cfg.glance_pairing_s * 1000.0);

    for (const auto& ev : screen) {
        switch (ev.state) {
            case ScreenState::On:
                if (episode_start < 0) pending_on = ev.ts;
                break;
            case ScreenState::Unlock:
                if (first_unlock_ts < 0) first_unlock_ts = ev.ts;
                if (episode_start < 0) {
                    episode_start = (pending_on >= 0 && ev.ts - pending_on <= pairing_ms) ? pending_on : ev.ts;
                    pending_on = -1;
                }
                break;
            case ScreenState::Off:
            case ScreenState::Lock:
                if (episode_start >= 0) {
                    durations_min.push_back(static_cast<double>(ev.ts - episode_start) / 60000.0);
                    episode_start = -1;
                }
                pending_on = -1;
                break;
        }
    }
    if (episode_start >= 0) {
        durations_min.push_back(static_cast<double>(window_end_ms - episode_start) / 60000.0);
        ++unclosed;
    }
    (void)window_start_ms;

    v[kPhoneCountEpisodes] = static_cast<double>(durations_min.size());
    v[kPhoneSumDurationMin] = std::accumulate(durations_min.begin(), durations_min.end(), 0.0);
    if (!durations_min.empty()) {
        v[kPhoneMaxDurationMin] = *std::max_element(durations_min.begin(), durations_min.end());
        v[kPhoneAvgDurationMin] = mean_of(durations_min);
        v[kPhoneStdDurationMin] = population_stddev(durations_min);
    }

    if (!sleeps.empty()) {
        std::int64_t wake_ms = sleeps.front().end_ms;
        for (const auto& s : sleeps) wake_ms = std::max(wake_ms, s.end_ms);
        std::int64_t first_use = -1;
        for (const auto& ev : screen) {
            if (ev.state == ScreenState::Unlock && ev.ts >= wake_ms) {
                first_use = ev.ts;
                break;
            }
        }
        if (first_use >= 0) {
            v[kPhoneFirstUseAfterWakeMin] = static_cast<double>(first_use - wake_ms) / 60000.0;
        }
    }
}

}  // namespace

DailyFeatureRow compute_daily_features(const ingest::DayWindow& window, const SignificantPlaces* places,
                                       const FeatureConfig& config) {
    DailyFeatureRow row;
    row.participant_id = window.participant_id;
    row.local_date = window.local_date;
    row.n_events = window.events.size();
    row.values.assign(kNumDailyFeatures, kMissing);
    auto& v = row.values;

    std::vector<TimedFix> fixes;
    std::vector<ScreenedEvent> screen;
    std::vector<ingest::SleepPayload> sleeps;
    std::size_t bt_count = 0;
    std::set<std::string> bt_devices;
    std::size_t missed = 0;
    std::set<std::string> contacts;
    std::vector<double> step_samples;

    for (const auto& ev : window.events) {
        switch (ev.kind) {
            case ingest::SensorKind::LocationFix: {
                const auto& p = std::get<ingest::LocationPayload>(ev.payload);
                fixes.push_back({ev.timestamp_ms, {p.latitude, p.longitude}});
                break;
            }
            case ingest::SensorKind::ScreenEvent:
                screen.push_back({ev.timestamp_ms, std::get<ingest::ScreenPayload>(ev.payload).state});
                break;
            case ingest::SensorKind::BluetoothSighting:
                ++bt_count;
                bt_devices.insert(std::get<ingest::BluetoothPayload>(ev.payload).device_hash);
                break;
            case ingest::SensorKind::CallRecord: {
                const auto& p = std::get<ingest::CallPayload>(ev.payload);
                if (p.direction == ingest::CallDirection::Missed) ++missed;
                contacts.insert(p.contact_hash);
                break;
            }
            case ingest::SensorKind::StepSample:
                step_samples.push_back(
                    static_cast<double>(std::get<ingest::StepsPayload>(ev.payload).step_count));
                break;
            case ingest::SensorKind::SleepEpisode:
                sleeps.push_back(std::get<ingest::SleepPayload>(ev.payload));
                break;
        }
    }

    location_features(fixes, places, config, v);

    const std::int64_t day_start_local = days_from_civil(window.local_date) * 86400000LL;
    const std::int64_t offset_ms = static_cast<std::int64_t>(config.utc_offset_minutes) * 60000;
    const std::int64_t window_start_utc = day_start_local - offset_ms;
    const std::int64_t window_end_utc = window_start_utc + 86400000LL;

    phone_features(screen, sleeps, window_start_utc, window_end_utc, config, v, row.unclosed_episodes);

    v[kBtCountScans] = static_cast<double>(bt_count);
    v[kBtUniqueDevices] = static_cast<double>(bt_devices.size());
    v[kCallMissedCount] = static_cast<double>(missed);
    v[kCallUniqueContacts] = static_cast<double>(contacts.size());

    v[kStepsSum] = std::accumulate(step_samples.begin(), step_samples.end(), 0.0);
    if (!step_samples.empty()) {
        v[kStepsMaxInterval] = *std::max_element(step_samples.begin(), step_samples.end());
        v[kStepsAvgInterval] = mean_of(step_samples);
        v[kStepsStdInterval] = population_stddev(step_samples);
    }

    double asleep = 0.0, awake = 0.0;
    std::vector<double> efficiencies, in_bed;
    for (const auto& s : sleeps) {
        asleep += s.minutes_asleep;
        awake += s.minutes_awake;
        efficiencies.push_back(s.efficiency);
        in_bed.push_back(static_cast<double>(s.end_ms - s.start_ms) / 60000.0);
    }
    v[kSleepSumAsleepMin] = asleep;
    v[kSleepSumAwakeMin] = awake;
    if (!sleeps.empty()) {
        v[kSleepAvgEfficiency] = mean_of(efficiencies);
        v[kSleepAvgInBedMin] = mean_of(in_bed);
    }
    return row;
}

ParticipantVector aggregate_participant(const std::vector<DailyFeatureRow>& rows) {
    if (rows.empty()) throw ValidationError("aggregate_participant requires at least one daily row");
    ParticipantVector out;
    out.participant_id = rows.front().participant_id;
    out.mean.assign(kNumDailyFeatures, kMissing);
    out.stddev.assign(kNumDailyFeatures, kMissing);
    for (const auto& r : rows) {
        if (r.n_events > 0) ++out.days_observed;
    }
    std::vector<double> buf;
    for (int f = 0; f < kNumDailyFeatures; ++f) {
        buf.clear();
        for (const auto& r : rows) {
            const double x = r.values[static_cast<std::size_t>(f)];
            if (!is_missing(x)) buf.push_back(x);
        }
        if (buf.empty()) continue;
        out.mean[static_cast<std::size_t>(f)] = mean_of(buf);
        out.stddev[static_cast<std::size_t>(f)] = population_stddev(buf);
    }
    return out;
}

std::vector<double> ParticipantVector::flat() const {
    std::vector<double> out;
    out.reserve(2 * mean.size());
    for (std::size_t f = 0; f < mean.size(); ++f) {
        out.push_back(mean[f]);
        out.push_back(stddev[f]);
    }
    return out;
}

ExtractionResult extract_features(const std::vector<ingest::DayWindow>& windows, const FeatureConfig& config,
                                  unsigned jobs) {
    // group windows by participant (already contiguous from segment_days)
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t i = 0;
    while (i < windows.size()) {
        std::size_t j = i;
        while (j < windows.size() && windows[j].participant_id == windows[i].participant_id) ++j;
        spans.emplace_back(i, j);
        i = j;
    }

    std::vector<std::vector<DailyFeatureRow>> daily_per(spans.size());
    std::vector<ParticipantVector> vectors(spans.size());

    parallel_for(spans.size(), jobs, [&](std::size_t s) {
        const auto [lo, hi] = spans[s];
        std::vector<LatLon> all_fixes;
        for (std::size_t w = lo; w < hi; ++w) {
            for (const auto& ev : windows[w].events) {
                if (ev.kind == ingest::SensorKind::LocationFix) {
                    const auto& p = std::get<ingest::LocationPayload>(ev.payload);
                    all_fixes.push_back({p.latitude, p.longitude});
                }
            }
        }
        SignificantPlaces places;
        const bool has_fixes = !all_fixes.empty();
        if (has_fixes) {
            places = fit_significant_places(all_fixes, config.cluster_eps_m, config.cluster_min_samples);
        }
        auto& rows = daily_per[s];
        rows.reserve(hi - lo);
        for (std::size_t w = lo; w < hi; ++w) {
            rows.push_back(compute_daily_features(windows[w], has_fixes ? &places : nullptr, config));
        }
        vectors[s] = aggregate_participant(rows);
    });

    ExtractionResult out;
    for (auto& rows : daily_per) {
        out.daily.insert(out.daily.end(), std::make_move_iterator(rows.begin()),
                         std::make_move_iterator(rows.end()));
    }
    out.participants = std::move(vectors);
    return out;
}

void write_daily_csv(const std::string& path, const std::vector<DailyFeatureRow>& rows) {
    std::vector<std::string> header = {"participant_id", "local_date"};
    for (const auto& f : daily_feature_names()) header.push_back(f);
    CsvWriter w(path, header);
    std::vector<std::string> fields;
    for (const auto& r : rows) {
        fields.clear();
        fields.push_back(r.participant_id);
        fields.push_back(r.local_date.to_string());
        for (double x : r.values) fields.push_back(format_double(x));
        w.write_row(fields);
    }
    w.close();
}

void write_participant_csv(const std::string& path, const std::vector<ParticipantVector>& vectors) {
    std::vector<std::string> header = {"participant_id", "days_observed"};
    for (const auto& f : participant_feature_names()) header.push_back(f);
    CsvWriter w(path, header);
    std::vector<std::string> fields;
    for (const auto& p : vectors) {
        fields.clear();
        fields.push_back(p.participant_id);
        fields.push_back(format_int(static_cast<std::int64_t>(p.days_observed)));
        for (double x : p.flat()) fields.push_back(format_double(x));
        w.write_row(fields);
    }
    w.close();
}

ParticipantTable load_participant_csv(const std::string& path) {
    CsvReader reader = CsvReader::open(path);
    std::vector<std::string> expected = {"participant_id", "days_observed"};
    for (const auto& f : participant_feature_names()) expected.push_back(f);
    if (reader.header() != expected) {
        throw ValidationError(path + ": header does not match features_participant schema");
    }
    ParticipantTable out;
    std::vector<std::string_view> fields;
    while (reader.next_row(fields)) {
        if (fields.size() != expected.size()) {
            throw ValidationError(path + ": malformed row at line " + std::to_string(reader.line_number()));
        }
        out.participant_ids.emplace_back(fields[0]);
        auto days = parse_int(fields[1]);
        out.days_observed.push_back(days ? static_cast<std::size_t>(*days) : 0);
        std::vector<double> row;
        row.reserve(fields.size() - 2);
        for (std::size_t c = 2; c < fields.size(); ++c) {
            auto v = parse_double(fields[c]);
            row.push_back(v ? *v : kMissing);
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace biomlab::features
