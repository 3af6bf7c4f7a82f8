#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "biomlab/features.hpp"
#include "biomlab/rng.hpp"

using namespace biomlab;
using namespace biomlab::features;
using ingest::DayWindow;
using ingest::ScreenState;
using ingest::SensorEvent;
using ingest::SensorKind;

namespace {

constexpr std::int64_t kMin = 60000;
const std::int64_t kDay0 = days_from_civil({2019, 4, 1}) * 86400000LL;

SensorEvent screen_at(std::int64_t ts, ScreenState s) {
    return {"p1", ts, SensorKind::ScreenEvent, ingest::ScreenPayload{s}};
}

SensorEvent fix_at(std::int64_t ts, double lat, double lon) {
    return {"p1", ts, SensorKind::LocationFix, ingest::LocationPayload{lat, lon, 10.0}};
}

DayWindow window_of(std::vector<SensorEvent> events) {
    return {"p1", {2019, 4, 1}, std::move(events)};
}

FeatureConfig config_utc0() {
    FeatureConfig fc;
    fc.utc_offset_minutes = 0;
    return fc;
}

// brute-force DBSCAN over haversine pairwise distances
std::vector<int> dbscan_reference(const std::vector<LatLon>& fixes, double eps, int min_samples) {
    const int n = static_cast<int>(fixes.size());
    std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (haversine_m(fixes[static_cast<std::size_t>(i)].lat, fixes[static_cast<std::size_t>(i)].lon,
                            fixes[static_cast<std::size_t>(j)].lat,
                            fixes[static_cast<std::size_t>(j)].lon) <= eps) {
                nbrs[static_cast<std::size_t>(i)].push_back(j);
            }
        }
    }
    std::vector<int> label(static_cast<std::size_t>(n), -2);
    int cluster = 0;
    for (int i = 0; i < n; ++i) {
        if (label[static_cast<std::size_t>(i)] != -2) continue;
        if (static_cast<int>(nbrs[static_cast<std::size_t>(i)].size()) < min_samples) {
            label[static_cast<std::size_t>(i)] = -1;
            continue;
        }
        std::vector<int> frontier = {i};
        label[static_cast<std::size_t>(i)] = cluster;
        while (!frontier.empty()) {
            const int q = frontier.back();
            frontier.pop_back();
            for (int nb : nbrs[static_cast<std::size_t>(q)]) {
                if (label[static_cast<std::size_t>(nb)] == -1) label[static_cast<std::size_t>(nb)] = cluster;
                if (label[static_cast<std::size_t>(nb)] != -2) continue;
                label[static_cast<std::size_t>(nb)] = cluster;
                if (static_cast<int>(nbrs[static_cast<std::size_t>(nb)].size()) >= min_samples) {
                    frontier.push_back(nb);
                }
            }
        }
        ++cluster;
    }
    for (auto& l : label) {
        if (l == -2) l = -1;
    }
    return label;
}

}  // namespace

TEST_CASE("haversine: 0.01 degrees of latitude is about 1111.9 m") {
    CHECK(haversine_m(40.0, -105.0, 40.01, -105.0) == doctest::Approx(1111.95).epsilon(1e-3));
    CHECK(haversine_m(40.0, -105.0, 40.0, -105.0) == doctest::Approx(0.0));
}

TEST_CASE("phone episodes: worked example") {
    const std::int64_t t0 = kDay0 + 10 * 3600000LL;
    auto w = window_of({
        screen_at(t0, ScreenState::Unlock),
        screen_at(t0 + 5 * kMin, ScreenState::Lock),
        screen_at(t0 + 60 * kMin, ScreenState::Unlock),
        screen_at(t0 + 90 * kMin, ScreenState::Lock),
    });
    const auto row = compute_daily_features(w, nullptr, config_utc0());
    CHECK(row.values[kPhoneCountEpisodes] == doctest::Approx(2.0));
    CHECK(row.values[kPhoneSumDurationMin] == doctest::Approx(35.0));
    CHECK(row.values[kPhoneMaxDurationMin] == doctest::Approx(30.0));
    CHECK(row.values[kPhoneAvgDurationMin] == doctest::Approx(17.5));
    CHECK(row.values[kPhoneStdDurationMin] == doctest::Approx(12.5));
    CHECK(row.unclosed_episodes == 0);
}

TEST_CASE("phone episodes: empty day keeps counts zero and stats missing") {
    const auto row = compute_daily_features(window_of({}), nullptr, config_utc0());
    CHECK(row.values[kPhoneCountEpisodes] == doctest::Approx(0.0));
    CHECK(row.values[kPhoneSumDurationMin] == doctest::Approx(0.0));
    CHECK(is_missing(row.values[kPhoneMaxDurationMin]));
    CHECK(is_missing(row.values[kPhoneAvgDurationMin]));
    CHECK(is_missing(row.values[kPhoneStdDurationMin]));
    CHECK(is_missing(row.values[kPhoneFirstUseAfterWakeMin]));
}

TEST_CASE("phone episodes: on+unlock pairing and glances") {
    const std::int64_t t0 = kDay0 + 9 * 3600000LL;
    SUBCASE("on followed by unlock within 30 s opens at the on") {
        auto w = window_of({
            screen_at(t0, ScreenState::On),
            screen_at(t0 + 10000, ScreenState::Unlock),
            screen_at(t0 + 10 * kMin, ScreenState::Lock),
        });
        const auto row = compute_daily_features(w, nullptr, config_utc0());
        CHECK(row.values[kPhoneCountEpisodes] == doctest::Approx(1.0));
        // on -> lock is exactly 10 min; opening at the unlock would give 9.8333
        CHECK(row.values[kPhoneSumDurationMin] == doctest::Approx(10.0));
    }
    SUBCASE("on without unlock within 30 s is a glance") {
        auto w = window_of({
            screen_at(t0, ScreenState::On),
            screen_at(t0 + 31000, ScreenState::Unlock),
            screen_at(t0 + 31000 + 5 * kMin, ScreenState::Lock),
        });
        const auto row = compute_daily_features(w, nullptr, config_utc0());
        CHECK(row.values[kPhoneCountEpisodes] == doctest::Approx(1.0));
        CHECK(row.values[kPhoneSumDurationMin] == doctest::Approx(5.0));
    }
    SUBCASE("lone on+off never opens an episode") {
        auto w = window_of({
            screen_at(t0, ScreenState::On),
            screen_at(t0 + 3000, ScreenState::Off),
        });
        const auto row = compute_daily_features(w, nullptr, config_utc0());
        CHECK(row.values[kPhoneCountEpisodes] == doctest::Approx(0.0));
    }
}

TEST_CASE("phone episodes: trailing episode truncates at the window edge and is flagged") {
    const std::int64_t t0 = kDay0 + 23 * 3600000LL + 50 * kMin;
    auto w = window_of({screen_at(t0, ScreenState::Unlock)});
    const auto row = compute_daily_features(w, nullptr, config_utc0());
    CHECK(row.unclosed_episodes == 1);
    CHECK(row.values[kPhoneCountEpisodes] == doctest::Approx(1.0));
    CHECK(row.values[kPhoneSumDurationMin] == doctest::Approx(10.0));  // 23:50 -> 24:00
}

TEST_CASE("first use after wake") {
    const std::int64_t wake = kDay0 + 7 * 3600000LL + 30 * kMin;
    ingest::SleepPayload sp;
    sp.start_ms = wake - 480 * kMin;
    sp.end_ms = wake;
    sp.minutes_asleep = 430;
    sp.minutes_awake = 50;
    sp.efficiency = 89.6;
    auto w = window_of({
        SensorEvent{"p1", wake, SensorKind::SleepEpisode, sp},
        screen_at(wake + 20 * kMin, ScreenState::Unlock),
        screen_at(wake + 25 * kMin, ScreenState::Lock),
    });
    const auto row = compute_daily_features(w, nullptr, config_utc0());
    CHECK(row.values[kPhoneFirstUseAfterWakeMin] == doctest::Approx(20.0));
    CHECK(row.values[kSleepSumAsleepMin] == doctest::Approx(430.0));
    CHECK(row.values[kSleepSumAwakeMin] == doctest::Approx(50.0));
    CHECK(row.values[kSleepAvgEfficiency] == doctest::Approx(89.6));
    CHECK(row.values[kSleepAvgInBedMin] == doctest::Approx(480.0));
}

TEST_CASE("bluetooth and call counters") {
    auto w = window_of({
        {"p1", kDay0 + 1000, SensorKind::BluetoothSighting, ingest::BluetoothPayload{"a", -70}},
        {"p1", kDay0 + 2000, SensorKind::BluetoothSighting, ingest::BluetoothPayload{"a", -60}},
        {"p1", kDay0 + 3000, SensorKind::BluetoothSighting, ingest::BluetoothPayload{"b", -50}},
        {"p1", kDay0 + 4000, SensorKind::CallRecord, ingest::CallPayload{ingest::CallDirection::Missed, "x", 0}},
        {"p1", kDay0 + 5000, SensorKind::CallRecord, ingest::CallPayload{ingest::CallDirection::Missed, "y", 0}},
        {"p1", kDay0 + 6000, SensorKind::CallRecord,
         ingest::CallPayload{ingest::CallDirection::Outgoing, "x", 60}},
    });
    const auto row = compute_daily_features(w, nullptr, config_utc0());
    CHECK(row.values[kBtCountScans] == doctest::Approx(3.0));
    CHECK(row.values[kBtUniqueDevices] == doctest::Approx(2.0));
    CHECK(row.values[kCallMissedCount] == doctest::Approx(2.0));
    CHECK(row.values[kCallUniqueContacts] == doctest::Approx(2.0));
}

TEST_CASE("dbscan: density threshold on coincident fixes") {
    std::vector<LatLon> ten(10, {40.0, -105.0});
    const auto places10 = fit_significant_places(ten, 30.0, 5);
    CHECK(places10.cluster_count() == 1);
    for (int l : places10.fit_labels) CHECK(l == 0);

    std::vector<LatLon> four(4, {40.0, -105.0});
    const auto places4 = fit_significant_places(four, 30.0, 5);
    CHECK(places4.cluster_count() == 0);
    for (int l : places4.fit_labels) CHECK(l == -1);
}

TEST_CASE("dbscan: two tight groups 10 km apart form two clusters") {
    Rng rng(3);
    std::vector<LatLon> fixes;
    for (int i = 0; i < 40; ++i) fixes.push_back({40.0 + rng.normal(0, 1e-5), -105.0 + rng.normal(0, 1e-5)});
    for (int i = 0; i < 40; ++i) fixes.push_back({40.09 + rng.normal(0, 1e-5), -105.0 + rng.normal(0, 1e-5)});
    const auto places = fit_significant_places(fixes, 100.0, 10);
    CHECK(places.cluster_count() == 2);
    // brute-force pairwise confirmation: identical partition
    const auto ref = dbscan_reference(fixes, 100.0, 10);
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        for (std::size_t j = 0; j < fixes.size(); ++j) {
            const bool same_mine = places.fit_labels[i] >= 0 && places.fit_labels[i] == places.fit_labels[j];
            const bool same_ref = ref[i] >= 0 && ref[i] == ref[j];
            CHECK(same_mine == same_ref);
        }
    }
}

TEST_CASE("dbscan matches brute force on random scatter") {
    Rng rng(1234);
    std::vector<LatLon> fixes;
    for (int i = 0; i < 300; ++i) {
        fixes.push_back({40.0 + rng.uniform(-0.003, 0.003), -105.0 + rng.uniform(-0.003, 0.003)});
    }
    const auto places = fit_significant_places(fixes, 40.0, 6);
    const auto ref = dbscan_reference(fixes, 40.0, 6);
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        CHECK((places.fit_labels[i] >= 0) == (ref[i] >= 0));
    }
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        for (std::size_t j = 0; j < fixes.size(); ++j) {
            const bool same_mine = places.fit_labels[i] >= 0 && places.fit_labels[i] == places.fit_labels[j];
            const bool same_ref = ref[i] >= 0 && ref[i] == ref[j];
            CHECK(same_mine == same_ref);
        }
    }
}

TEST_CASE("location features: degenerate single point geometry") {
    std::vector<SensorEvent> events;
    for (int i = 0; i < 12; ++i) events.push_back(fix_at(kDay0 + i * 15 * kMin, 40.0, -105.0));
    std::vector<LatLon> fixes(12, {40.0, -105.0});
    const auto places = fit_significant_places(fixes, 30.0, 5);
    const auto row = compute_daily_features(window_of(events), &places, config_utc0());
    CHECK(row.values[kLocVariance] == doctest::Approx(0.0));
    CHECK(is_missing(row.values[kLocLogVariance]));
    CHECK(row.values[kLocTotalDistanceM] == doctest::Approx(0.0));
    CHECK(row.values[kLocRadiusGyrationM] == doctest::Approx(0.0));
    CHECK(row.values[kLocNumTransitions] == doctest::Approx(0.0));
    CHECK(row.values[kLocNumSignificantPlaces] == doctest::Approx(1.0));
    CHECK(row.values[kLocEntropy] == doctest::Approx(0.0));
    CHECK(row.values[kLocNormalizedEntropy] == doctest::Approx(0.0));
}

TEST_CASE("location features: equal time in two clusters gives entropy ln 2") {
    std::vector<LatLon> fit_fixes;
    for (int i = 0; i < 20; ++i) fit_fixes.push_back({40.0, -105.0});
    for (int i = 0; i < 20; ++i) fit_fixes.push_back({40.05, -105.0});
    const auto places = fit_significant_places(fit_fixes, 30.0, 5);
    REQUIRE(places.cluster_count() == 2);

    std::vector<SensorEvent> events;
    for (int i = 0; i < 8; ++i) events.push_back(fix_at(kDay0 + i * 15 * kMin, 40.0, -105.0));
    for (int i = 8; i < 16; ++i) events.push_back(fix_at(kDay0 + i * 15 * kMin, 40.05, -105.0));
    const auto row = compute_daily_features(window_of(events), &places, config_utc0());
    CHECK(row.values[kLocEntropy] == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(row.values[kLocNormalizedEntropy] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(row.values[kLocNumSignificantPlaces] == doctest::Approx(2.0));
    CHECK(row.values[kLocNumTransitions] == doctest::Approx(1.0));
}

TEST_CASE("location single fix: distance zero, entropy missing, speed missing") {
    std::vector<LatLon> fixes(12, {40.0, -105.0});
    const auto places = fit_significant_places(fixes, 30.0, 5);
    const auto row = compute_daily_features(window_of({fix_at(kDay0 + 1000, 40.0, -105.0)}), &places,
                                            config_utc0());
    CHECK(row.values[kLocTotalDistanceM] == doctest::Approx(0.0));
    CHECK(row.values[kLocVariance] == doctest::Approx(0.0));
    CHECK(is_missing(row.values[kLocEntropy]));
    CHECK(is_missing(row.values[kLocNormalizedEntropy]));
    CHECK(is_missing(row.values[kLocAvgSpeedMps]));
}

TEST_CASE("translation invariance: shifting timestamps leaves duration features unchanged") {
    const std::int64_t t0 = kDay0 + 8 * 3600000LL;
    std::vector<SensorEvent> base = {
        screen_at(t0, ScreenState::Unlock),
        screen_at(t0 + 7 * kMin, ScreenState::Lock),
        screen_at(t0 + 200 * kMin, ScreenState::Unlock),
        screen_at(t0 + 230 * kMin, ScreenState::Lock),
    };
    const auto row0 = compute_daily_features(window_of(base), nullptr, config_utc0());
    std::vector<SensorEvent> shifted = base;
    for (auto& e : shifted) e.timestamp_ms += 90 * kMin;
    const auto row1 = compute_daily_features(window_of(shifted), nullptr, config_utc0());
    for (int f : {kPhoneCountEpisodes, kPhoneSumDurationMin, kPhoneMaxDurationMin, kPhoneAvgDurationMin,
                  kPhoneStdDurationMin}) {
        CHECK(row0.values[static_cast<std::size_t>(f)] ==
              doctest::Approx(row1.values[static_cast<std::size_t>(f)]));
    }
}

TEST_CASE("rigid-motion invariance: rotating fixes preserves radius of gyration within 1e-6") {
    Rng rng(41);
    std::vector<LatLon> pts;
    // small patch (~100 m) so the flat rotation is rigid to well below 1e-6
    const double clat = 40.0, clon = -105.0;
    for (int i = 0; i < 60; ++i) {
        pts.push_back({clat + rng.uniform(-0.0005, 0.0005), clon + rng.uniform(-0.0005, 0.0005)});
    }
    const double cos_lat = std::cos(clat * 0.017453292519943295);
    const auto rotate = [&](const LatLon& p, double angle) {
        const double dy = p.lat - clat;
        const double dx = (p.lon - clon) * cos_lat;
        return LatLon{clat + dy * std::cos(angle) + dx * std::sin(angle),
                      clon + (-dy * std::sin(angle) + dx * std::cos(angle)) / cos_lat};
    };
    const auto gyration = [&](const std::vector<LatLon>& fixes) {
        std::vector<SensorEvent> events;
        for (std::size_t i = 0; i < fixes.size(); ++i) {
            events.push_back(fix_at(kDay0 + static_cast<std::int64_t>(i) * 10 * kMin, fixes[i].lat, fixes[i].lon));
        }
        const auto places = fit_significant_places(fixes, 30.0, 5);
        return compute_daily_features(window_of(events), &places, config_utc0())
            .values[kLocRadiusGyrationM];
    };
    const double r0 = gyration(pts);
    std::vector<LatLon> rotated;
    for (const auto& p : pts) rotated.push_back(rotate(p, 0.7));
    const double r1 = gyration(rotated);
    CHECK(std::abs(r0 - r1) / r0 < 1e-6);
}

TEST_CASE("monotonicity: adding an episode never decreases count or sum") {
    const std::int64_t t0 = kDay0 + 9 * 3600000LL;
    std::vector<SensorEvent> base = {
        screen_at(t0, ScreenState::Unlock),
        screen_at(t0 + 20 * kMin, ScreenState::Lock),
    };
    const auto row0 = compute_daily_features(window_of(base), nullptr, config_utc0());
    auto extended = base;
    extended.push_back(screen_at(t0 + 60 * kMin, ScreenState::Unlock));
    extended.push_back(screen_at(t0 + 65 * kMin, ScreenState::Lock));
    const auto row1 = compute_daily_features(window_of(extended), nullptr, config_utc0());
    CHECK(row1.values[kPhoneCountEpisodes] >= row0.values[kPhoneCountEpisodes]);
    CHECK(row1.values[kPhoneSumDurationMin] >= row0.values[kPhoneSumDurationMin]);
}

TEST_CASE("steps features") {
    auto w = window_of({
        {"p1", kDay0 + 1 * kMin, SensorKind::StepSample, ingest::StepsPayload{100}},
        {"p1", kDay0 + 2 * kMin, SensorKind::StepSample, ingest::StepsPayload{300}},
        {"p1", kDay0 + 3 * kMin, SensorKind::StepSample, ingest::StepsPayload{200}},
    });
    const auto row = compute_daily_features(w, nullptr, config_utc0());
    CHECK(row.values[kStepsSum] == doctest::Approx(600.0));
    CHECK(row.values[kStepsMaxInterval] == doctest::Approx(300.0));
    CHECK(row.values[kStepsAvgInterval] == doctest::Approx(200.0));
    CHECK(row.values[kStepsStdInterval] == doctest::Approx(std::sqrt(20000.0 / 3.0)));
}

TEST_CASE("aggregation equals a brute-force two-pass computation") {
    Rng rng(55);
    std::vector<DailyFeatureRow> rows;
    for (int d = 0; d < 30; ++d) {
        DailyFeatureRow r;
        r.participant_id = "p1";
        r.local_date = civil_from_days(days_from_civil({2019, 4, 1}) + d);
        r.n_events = 1;
        r.values.assign(kNumDailyFeatures, kMissing);
        for (int f = 0; f < kNumDailyFeatures; ++f) {
            if (rng.uniform() < 0.8) r.values[static_cast<std::size_t>(f)] = rng.normal(10, 4);
        }
        rows.push_back(std::move(r));
    }
    const auto agg = aggregate_participant(rows);
    CHECK(agg.days_observed == 30);
    for (int f = 0; f < kNumDailyFeatures; ++f) {
        std::vector<double> vals;
        for (const auto& r : rows) {
            if (!is_missing(r.values[static_cast<std::size_t>(f)])) {
                vals.push_back(r.values[static_cast<std::size_t>(f)]);
            }
        }
        if (vals.empty()) {
            CHECK(is_missing(agg.mean[static_cast<std::size_t>(f)]));
            continue;
        }
        double s = 0.0;
        for (double v : vals) s += v;
        const double mean = s / static_cast<double>(vals.size());
        double sq = 0.0;
        for (double v : vals) sq += (v - mean) * (v - mean);
        CHECK(agg.mean[static_cast<std::size_t>(f)] == doctest::Approx(mean).epsilon(1e-12));
        CHECK(agg.stddev[static_cast<std::size_t>(f)] ==
              doctest::Approx(std::sqrt(sq / static_cast<double>(vals.size()))).epsilon(1e-12));
    }
}

TEST_CASE("aggregation: one day gives std 0; all-missing stays missing") {
    DailyFeatureRow r;
    r.participant_id = "p1";
    r.local_date = {2019, 4, 1};
    r.n_events = 1;
    r.values.assign(kNumDailyFeatures, kMissing);
    r.values[kStepsSum] = 1000.0;
    const auto agg = aggregate_participant({r});
    CHECK(agg.mean[kStepsSum] == doctest::Approx(1000.0));
    CHECK(agg.stddev[kStepsSum] == doctest::Approx(0.0));
    CHECK(is_missing(agg.mean[kLocVariance]));

    DailyFeatureRow r2 = r;
    r2.values[kStepsSum] = 3000.0;
    r2.local_date = {2019, 4, 2};
    const auto agg2 = aggregate_participant({r, r2});
    CHECK(agg2.mean[kStepsSum] == doctest::Approx(2000.0));
    CHECK(agg2.stddev[kStepsSum] == doctest::Approx(1000.0));
}

TEST_CASE("feature name tables are consistent") {
    CHECK(daily_feature_names().size() == kNumDailyFeatures);
    CHECK(participant_feature_names().size() == 2 * kNumDailyFeatures);
    CHECK(daily_feature_names()[kLocNormalizedEntropy] == "loc_normalized_entropy");
    CHECK(participant_feature_names()[2 * kSleepSumAsleepMin] == "sleep_sum_asleep_min_mean");
}

TEST_CASE("entropy bounds hold on random days") {
    Rng rng(7);
    std::vector<LatLon> fit_fixes;
    for (int c = 0; c < 4; ++c) {
        for (int i = 0; i < 30; ++i) {
            fit_fixes.push_back({40.0 + c * 0.01 + rng.normal(0, 5e-5), -105.0 + rng.normal(0, 5e-5)});
        }
    }
    const auto places = fit_significant_places(fit_fixes, 50.0, 10);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<SensorEvent> events;
        const int m = 2 + static_cast<int>(rng.uniform_int(0, 30));
        for (int i = 0; i < m; ++i) {
            const auto c = rng.uniform_index(4);
            events.push_back(fix_at(kDay0 + i * 12 * kMin,
                                    40.0 + static_cast<double>(c) * 0.01 + rng.normal(0, 5e-5),
                                    -105.0 + rng.normal(0, 5e-5)));
        }
        const auto row = compute_daily_features(window_of(events), &places, config_utc0());
        const double k = row.values[kLocNumSignificantPlaces];
        if (k >= 1.0) {
            CHECK(row.values[kLocEntropy] >= -1e-12);
            CHECK(row.values[kLocEntropy] <= std::log(std::max(k, 1.0)) + 1e-9);
            CHECK(row.values[kLocNormalizedEntropy] >= -1e-12);
            CHECK(row.values[kLocNormalizedEntropy] <= 1.0 + 1e-12);
        }
    }
}
