#include "biomlab/synthcohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "biomlab/csv.hpp"
#include "biomlab/features.hpp"
#include "biomlab/ingest.hpp"
#include "biomlab/rng.hpp"
#include "biomlab/stats.hpp"

namespace biomlab::synth {

using labeling::Category;
using nlohmann::json;

CohortConfig::CohortConfig() {
    auto& sl = categories[0];
    sl.phone_min_per_day = 400.0;
    sl.episodes_per_day = 12.0;
    sl.first_use_after_wake_min = 12.0;
    sl.cluster_count = 4;
    sl.hop_rate = 0.045;
    sl.cluster_spread_m = 1300.0;
    sl.bt_pool = 4;
    sl.bt_scans_per_day = 25.0;
    sl.steps_per_day = 4800.0;
    sl.sleep_asleep_min = 510.0;
    sl.sleep_awake_min = 60.0;
    sl.missed_call_frac = 0.5;
    sl.contact_pool = 3;
    sl.social_lo = 12; sl.social_hi = 16;
    sl.emotional_lo = 6; sl.emotional_hi = 10;

    auto& el = categories[1];
    el.phone_min_per_day = 495.0;
    el.episodes_per_day = 20.0;
    el.first_use_after_wake_min = 35.0;
    el.cluster_count = 6;
    el.hop_rate = 0.10;
    el.cluster_spread_m = 2600.0;
    el.bt_pool = 7;
    el.bt_scans_per_day = 40.0;
    el.steps_per_day = 5300.0;
    el.sleep_asleep_min = 330.0;
    el.sleep_awake_min = 108.0;
    el.missed_call_frac = 0.25;
    el.contact_pool = 6;
    el.social_lo = 6; el.social_hi = 10;
    el.emotional_lo = 12; el.emotional_hi = 16;

    auto& both = categories[2];
    both.phone_min_per_day = 460.0;
    both.episodes_per_day = 28.0;
    both.first_use_after_wake_min = 25.0;
    both.cluster_count = 4;
    both.hop_rate = 0.05;
    both.cluster_spread_m = 1400.0;
    both.bt_pool = 12;
    both.bt_scans_per_day = 60.0;
    both.steps_per_day = 6500.0;
    both.sleep_asleep_min = 395.0;
    both.sleep_awake_min = 80.0;
    both.missed_call_frac = 0.35;
    both.contact_pool = 8;
    both.social_lo = 12; both.social_hi = 16;
    both.emotional_lo = 12; both.emotional_hi = 16;

    auto& not_lonely = categories[3];
    not_lonely.phone_min_per_day = 430.0;
    not_lonely.episodes_per_day = 8.0;
    not_lonely.first_use_after_wake_min = 18.0;
    not_lonely.cluster_count = 5;
    not_lonely.hop_rate = 0.07;
    not_lonely.cluster_spread_m = 1900.0;
    not_lonely.bt_pool = 9;
    not_lonely.bt_scans_per_day = 32.0;
    not_lonely.steps_per_day = 7500.0;
    not_lonely.sleep_asleep_min = 420.0;
    not_lonely.sleep_awake_min = 70.0;
    not_lonely.missed_call_frac = 0.15;
    not_lonely.contact_pool = 10;
    not_lonely.social_lo = 6; not_lonely.social_hi = 10;
    not_lonely.emotional_lo = 6; not_lonely.emotional_hi = 10;
}

namespace {

json category_to_json(const CategoryParams& c) {
    return json{{"phone_min_per_day", c.phone_min_per_day},
                {"episodes_per_day", c.episodes_per_day},
                {"first_use_after_wake_min", c.first_use_after_wake_min},
                {"cluster_count", c.cluster_count},
                {"hop_rate", c.hop_rate},
                {"cluster_spread_m", c.cluster_spread_m},
                {"bt_pool", c.bt_pool},
                {"bt_scans_per_day", c.bt_scans_per_day},
                {"steps_per_day", c.steps_per_day},
                {"steps_daily_sd", c.steps_daily_sd},
                {"sleep_asleep_min", c.sleep_asleep_min},
                {"sleep_awake_min", c.sleep_awake_min},
                {"calls_per_day", c.calls_per_day},
                {"missed_call_frac", c.missed_call_frac},
                {"contact_pool", c.contact_pool},
                {"social_lo", c.social_lo},
                {"social_hi", c.social_hi},
                {"emotional_lo", c.emotional_lo},
                {"emotional_hi", c.emotional_hi}};
}

CategoryParams category_from_json(const json& j, CategoryParams base) {
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("phone_min_per_day", base.phone_min_per_day);
    get("episodes_per_day", base.episodes_per_day);
    get("first_use_after_wake_min", base.first_use_after_wake_min);
    get("cluster_count", base.cluster_count);
    get("hop_rate", base.hop_rate);
    get("cluster_spread_m", base.cluster_spread_m);
    get("bt_pool", base.bt_pool);
    get("bt_scans_per_day", base.bt_scans_per_day);
    get("steps_per_day", base.steps_per_day);
    get("steps_daily_sd", base.steps_daily_sd);
    get("sleep_asleep_min", base.sleep_asleep_min);
    get("sleep_awake_min", base.sleep_awake_min);
    get("calls_per_day", base.calls_per_day);
    get("missed_call_frac", base.missed_call_frac);
    get("contact_pool", base.contact_pool);
    get("social_lo", base.social_lo);
    get("social_hi", base.social_hi);
    get("emotional_lo", base.emotional_lo);
    get("emotional_hi", base.emotional_hi);
    return base;
}

}  // namespace

json cohort_config_to_json(const CohortConfig& cfg) {
    json cats = json::object();
    for (int c = 0; c < labeling::kNumCategories; ++c) {
        cats[labeling::category_name(static_cast<Category>(c))] =
            category_to_json(cfg.categories[static_cast<std::size_t>(c)]);
    }
    return json{{"n_per_category", cfg.n_per_category}, {"days", cfg.days},
                {"utc_offset_minutes", cfg.utc_offset_minutes}, {"seed", cfg.seed},
                {"noise_scale", cfg.noise_scale}, {"between_scale", cfg.between_scale},
                {"categories", std::move(cats)}};
}

CohortConfig cohort_config_from_json(const json& j) {
    CohortConfig cfg;
    if (j.contains("n_per_category")) {
        const auto counts = j.at("n_per_category").get<std::vector<int>>();
        if (counts.size() != labeling::kNumCategories) {
            throw ValidationError("n_per_category must list 4 counts");
        }
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] < 0) throw ValidationError("n_per_category entries must be >= 0");
            cfg.n_per_category[c] = counts[c];
        }
    }
    if (j.contains("days")) cfg.days = j.at("days").get<int>();
    if (cfg.days < 1) throw ValidationError("synth days must be >= 1");
    if (j.contains("utc_offset_minutes")) cfg.utc_offset_minutes = j.at("utc_offset_minutes").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("noise_scale")) cfg.noise_scale = j.at("noise_scale").get<double>();
    if (j.contains("between_scale")) cfg.between_scale = j.at("between_scale").get<double>();
    if (cfg.noise_scale < 0.0 || cfg.between_scale < 0.0) {
        throw ValidationError("noise scales must be >= 0");
    }
    if (j.contains("categories")) {
        for (int c = 0; c < labeling::kNumCategories; ++c) {
            const char* name = labeling::category_name(static_cast<Category>(c));
            if (j.at("categories").contains(name)) {
                cfg.categories[static_cast<std::size_t>(c)] =
                    category_from_json(j.at("categories").at(name), cfg.categories[static_cast<std::size_t>(c)]);
            }
        }
    }
    return cfg;
}

std::array<int, 10> backsolve_ucla(int social_target, int emotional_target) {
    if (social_target < 5 || social_target > 20 || emotional_target < 5 || emotional_target > 20) {
        throw ValidationError("UCLA subscale target outside 5..20");
    }
    std::array<int, 10> raw{};
    for (const auto sub : {labeling::Subscale::Emotional, labeling::Subscale::Social}) {
        const int target = sub == labeling::Subscale::Social ? social_target : emotional_target;
        std::vector<const labeling::ItemSpec*> items;
        for (const auto& item : labeling::ucla_items()) {
            if (item.subscale == sub) items.push_back(&item);
        }
        int remaining = target;
        for (std::size_t i = 0; i < items.size(); ++i) {
            const int rest = static_cast<int>(items.size() - 1 - i);
            bool placed = false;
            for (int r = 1; r <= 4 && !placed; ++r) {
                const int v = items[i]->reverse_scored ? 5 - r : r;
                const int need = remaining - v;
                if (need >= rest * 1 && need <= rest * 4) {
                    raw[static_cast<std::size_t>(items[i]->item_id - 1)] = r;
                    remaining = need;
                    placed = true;
                }
            }
            if (!placed) throw std::logic_error("backsolve_ucla: infeasible target");
        }
    }
    return raw;
}

namespace {

constexpr std::int64_t kMsPerMin = 60000;
constexpr std::int64_t kMsPerDay = 86400000;
constexpr double kMetersPerDegLat = 111320.0;

struct NoisyRng {
    Rng rng;
    double noise;

    double normal(double mu, double sd) { return noise <= 0.0 ? mu : rng.normal(mu, sd * noise); }
    double exponential(double mean) {
        if (noise <= 0.0) {
            return mean;
        }
        // noise only shapes dispersion around the mean, not the mean itself
        return mean + noise * (rng.exponential(mean) - mean);
    }
    std::int64_t poisson(double lambda) {
        return noise <= 0.0 ? static_cast<std::int64_t>(std::llround(lambda))
                            : static_cast<std::int64_t>(rng.poisson(lambda));
    }
};

struct EventSink {
    std::vector<ingest::SensorEvent> location, screen, bluetooth, calls, steps, sleep;
};

std::string participant_label(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%03zu", index + 1);
    return buf;
}

void sort_and_decollide(std::vector<ingest::SensorEvent>& events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const ingest::SensorEvent& a, const ingest::SensorEvent& b) {
                         if (a.participant_id != b.participant_id) return a.participant_id < b.participant_id;
                         return a.timestamp_ms < b.timestamp_ms;
                     });
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i].participant_id == events[i - 1].participant_id &&
            events[i].timestamp_ms <= events[i - 1].timestamp_ms) {
            events[i].timestamp_ms = events[i - 1].timestamp_ms + 1;
        }
    }
}

}  // namespace

GroundTruthManifest generate(const CohortConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    // fixed study start: first full day of the simulated quarter
    const CivilDate start_date{2019, 4, 1};
    const std::int64_t start_day = days_from_civil(start_date);
    const std::int64_t offset_ms = static_cast<std::int64_t>(cfg.utc_offset_minutes) * kMsPerMin;

    GroundTruthManifest manifest;
    manifest.seed = cfg.seed;
    manifest.config_echo = cohort_config_to_json(cfg);
    manifest.planted = {
        {"phone_sum_duration_min_mean", -1}, {"phone_count_episodes_mean", -1},
        {"phone_first_use_after_wake_min_mean", -1}, {"loc_variance_mean", -1},
        {"loc_num_significant_places_mean", -1}, {"loc_num_transitions_mean", -1},
        {"bt_count_scans_mean", -1}, {"bt_unique_devices_mean", -1},
        {"steps_max_interval_mean", -1}, {"steps_avg_interval_mean", -1},
        {"sleep_sum_awake_min_mean", -1}, {"sleep_sum_asleep_min_mean", 1},
    };
    manifest.dominant_feature = "sleep_sum_asleep_min_mean";
    manifest.driven_class = Category::SociallyLonely;

    EventSink sink;
    std::vector<std::array<int, 10>> ucla_rows;
    std::vector<std::string> ids;

    std::size_t participant_index = 0;
    for (int c = 0; c < labeling::kNumCategories; ++c) {
        const auto& cat = cfg.categories[static_cast<std::size_t>(c)];
        for (int rep = 0; rep < cfg.n_per_category[static_cast<std::size_t>(c)]; ++rep, ++participant_index) {
            const std::string pid = participant_label(participant_index);
            ids.push_back(pid);
            manifest.participants.emplace_back(pid, static_cast<Category>(c));

            const std::uint64_t pi = participant_index;
            NoisyRng between{derive_rng(cfg.seed, {10, pi}), cfg.between_scale};

            // participant-level heterogeneity
            const double phone_m = std::max(0.2, between.normal(1.0, 0.06));
            const double episodes_m = std::max(0.2, between.normal(1.0, 0.08));
            const double steps_m = std::max(0.2, between.normal(1.0, 0.05));
            const double bt_m = std::max(0.2, between.normal(1.0, 0.08));
            const double spread_m_mult = std::max(0.3, between.normal(1.0, 0.08));
            const double first_use_m = std::max(0.2, between.normal(1.0, 0.15));
            const double asleep_add = between.normal(0.0, 12.0);
            const double awake_add = between.normal(0.0, 6.0);

            // UCLA targets drawn per participant, then back-solved
            Rng ucla_rng = derive_rng(cfg.seed, {20, pi});
            const int social = static_cast<int>(ucla_rng.uniform_int(cat.social_lo, cat.social_hi));
            const int emotional = static_cast<int>(ucla_rng.uniform_int(cat.emotional_lo, cat.emotional_hi));
            ucla_rows.push_back(backsolve_ucla(social, emotional));

            // cluster centers: participant-specific base plus spread-scaled offsets
            Rng geo_rng = derive_rng(cfg.seed, {30, pi});
            const double base_lat = 40.0 + 0.02 * static_cast<double>(pi % 97);
            const double base_lon = -105.0 - 0.02 * static_cast<double>(pi / 97);
            const double spread_deg = cat.cluster_spread_m * spread_m_mult / kMetersPerDegLat;
            const double cos_lat = std::cos(base_lat * 0.017453292519943295);
            std::vector<features::LatLon> centers;
            centers.push_back({base_lat, base_lon});
            for (int k = 1; k < cat.cluster_count; ++k) {
                const double angle = geo_rng.uniform(0.0, 6.283185307179586);
                const double radius = spread_deg * (0.55 + 0.45 * geo_rng.uniform());
                centers.push_back({base_lat + radius * std::sin(angle),
                                   base_lon + radius * std::cos(angle) / std::max(0.2, cos_lat)});
            }

            for (int d = 0; d < cfg.days; ++d) {
                const auto du = static_cast<std::uint64_t>(d);
                const std::int64_t day_local = (start_day + d) * kMsPerDay;

                // --- sleep: one episode ending this morning
                NoisyRng sleep_rng{derive_rng(cfg.seed, {11, pi, du}), cfg.noise_scale};
                const double wake_min = 7.0 * 60.0 + sleep_rng.normal(0.0, 25.0);
                const double asleep = std::max(60.0, sleep_rng.normal(cat.sleep_asleep_min + asleep_add, 40.0));
                const double awake = std::max(5.0, sleep_rng.normal(cat.sleep_awake_min + awake_add, 15.0));
                const std::int64_t wake_local = day_local + static_cast<std::int64_t>(wake_min * kMsPerMin);
                const std::int64_t sleep_end_utc = wake_local - offset_ms;
                ingest::SleepPayload sp;
                sp.minutes_asleep = round_half_up(asleep, 1);
                sp.minutes_awake = round_half_up(awake, 1);
                // span derives from the rounded minutes so the in-bed identity
                // holds exactly after CSV round-tripping
                const std::int64_t sleep_start_utc =
                    sleep_end_utc - std::llround((sp.minutes_asleep + sp.minutes_awake) * kMsPerMin);
                sp.start_ms = sleep_start_utc;
                sp.end_ms = sleep_end_utc;
                sp.efficiency =
                    round_half_up(100.0 * sp.minutes_asleep / (sp.minutes_asleep + sp.minutes_awake), 1);
                sink.sleep.push_back({pid, sleep_end_utc, ingest::SensorKind::SleepEpisode, sp});

                const std::int64_t waking_span = 16LL * 60 * kMsPerMin;

                // --- screen episodes
                NoisyRng screen_rng{derive_rng(cfg.seed, {12, pi, du}), cfg.noise_scale};
                const auto n_ep =
                    std::max<std::int64_t>(1, screen_rng.poisson(cat.episodes_per_day * episodes_m));
                const double target_min = cat.phone_min_per_day * phone_m;
                std::vector<std::int64_t> starts;
                const double first_gap =
                    std::max(1.0, screen_rng.normal(cat.first_use_after_wake_min * first_use_m, 6.0));
                starts.push_back(sleep_end_utc + static_cast<std::int64_t>(first_gap * kMsPerMin));
                for (std::int64_t e = 1; e < n_ep; ++e) {
                    if (cfg.noise_scale <= 0.0) {
                        starts.push_back(sleep_end_utc +
                                         static_cast<std::int64_t>(90 * kMsPerMin + e * (waking_span - 120 * kMsPerMin) / n_ep));
                    } else {
                        starts.push_back(sleep_end_utc + 90 * kMsPerMin +
                                         static_cast<std::int64_t>(screen_rng.rng.uniform() *
                                                                   static_cast<double>(waking_span - 120 * kMsPerMin)));
                    }
                }
                std::sort(starts.begin(), starts.end());
                std::int64_t prev_end = 0;
                for (std::size_t e = 0; e < starts.size(); ++e) {
                    const double dur_min = std::max(0.2, screen_rng.exponential(target_min / static_cast<double>(n_ep)));
                    std::int64_t s = std::max(starts[e], prev_end + 60 * 1000);
                    const std::int64_t t_end = s + static_cast<std::int64_t>(dur_min * kMsPerMin);
                    // occasional screen-on preceding the unlock (paired within 30 s)
                    if (cfg.noise_scale > 0.0 && screen_rng.rng.uniform() < 0.15) {
                        sink.screen.push_back({pid, s - 5000, ingest::SensorKind::ScreenEvent,
                                               ingest::ScreenPayload{ingest::ScreenState::On}});
                    }
                    sink.screen.push_back({pid, s, ingest::SensorKind::ScreenEvent,
                                           ingest::ScreenPayload{ingest::ScreenState::Unlock}});
                    sink.screen.push_back({pid, t_end, ingest::SensorKind::ScreenEvent,
                                           ingest::ScreenPayload{ingest::ScreenState::Lock}});
                    prev_end = t_end;
                }
                // lone glances (screen on, never unlocked)
                const auto n_glance = screen_rng.poisson(2.0 * cfg.noise_scale);
                for (std::int64_t gidx = 0; gidx < n_glance; ++gidx) {
                    const std::int64_t t = sleep_end_utc +
                                           static_cast<std::int64_t>(screen_rng.rng.uniform() *
                                                                     static_cast<double>(waking_span));
                    sink.screen.push_back({pid, t, ingest::SensorKind::ScreenEvent,
                                           ingest::ScreenPayload{ingest::ScreenState::On}});
                    sink.screen.push_back({pid, t + 2000, ingest::SensorKind::ScreenEvent,
                                           ingest::ScreenPayload{ingest::ScreenState::Off}});
                }

                // --- location fixes every 15 min while awake
                NoisyRng loc_rng{derive_rng(cfg.seed, {13, pi, du}), cfg.noise_scale};
                int current = 0;
                const double jitter_deg = 8.0 / kMetersPerDegLat;
                for (std::int64_t t = 0; t < waking_span; t += 15 * kMsPerMin) {
                    if (centers.size() > 1 && loc_rng.rng.uniform() < cat.hop_rate) {
                        int next = current;
                        while (next == current) {
                            next = static_cast<int>(loc_rng.rng.uniform_index(centers.size()));
                        }
                        current = next;
                    }
                    const auto& ctr = centers[static_cast<std::size_t>(current)];
                    ingest::LocationPayload lp;
                    lp.latitude = ctr.lat + loc_rng.normal(0.0, jitter_deg);
                    lp.longitude = ctr.lon + loc_rng.normal(0.0, jitter_deg / std::max(0.2, cos_lat));
                    lp.accuracy_m = round_half_up(5.0 + 20.0 * loc_rng.rng.uniform(), 1);
                    const std::int64_t jitter_ms =
                        cfg.noise_scale > 0.0
                            ? static_cast<std::int64_t>((loc_rng.rng.uniform() - 0.5) * 4.0 * kMsPerMin)
                            : 0;
                    sink.location.push_back(
                        {pid, sleep_end_utc + t + jitter_ms, ingest::SensorKind::LocationFix, lp});
                }

                // --- bluetooth sightings
                NoisyRng bt_rng{derive_rng(cfg.seed, {14, pi, du}), cfg.noise_scale};
                const auto n_bt = bt_rng.poisson(cat.bt_scans_per_day * bt_m);
                for (std::int64_t s = 0; s < n_bt; ++s) {
                    ingest::BluetoothPayload bp;
                    bp.device_hash = "dev" + std::to_string(bt_rng.rng.uniform_index(
                                                 static_cast<std::size_t>(std::max(1, cat.bt_pool))));
                    bp.rssi = static_cast<int>(std::clamp(std::llround(bt_rng.normal(-70.0, 8.0)), -100LL, -30LL));
                    const std::int64_t t = sleep_end_utc +
                                           static_cast<std::int64_t>(bt_rng.rng.uniform() *
                                                                     static_cast<double>(waking_span));
                    sink.bluetooth.push_back({pid, t, ingest::SensorKind::BluetoothSighting, bp});
                }

                // --- steps: 16 hourly samples
                NoisyRng steps_rng{derive_rng(cfg.seed, {15, pi, du}), cfg.noise_scale};
                const double per_interval = cat.steps_per_day * steps_m / 16.0;
                const double interval_sd = cat.steps_daily_sd / 4.0;
                for (int hside = 0; hside < 16; ++hside) {
                    ingest::StepsPayload stp;
                    stp.step_count = std::max<std::int64_t>(
                        0, std::llround(steps_rng.normal(per_interval, interval_sd)));
                    sink.steps.push_back({pid, sleep_end_utc + hside * 60 * kMsPerMin + 30 * kMsPerMin,
                                          ingest::SensorKind::StepSample, stp});
                }

                // --- calls
                NoisyRng call_rng{derive_rng(cfg.seed, {16, pi, du}), cfg.noise_scale};
                const auto n_calls = call_rng.poisson(cat.calls_per_day);
                for (std::int64_t k = 0; k < n_calls; ++k) {
                    ingest::CallPayload cp;
                    const bool is_missed = call_rng.rng.uniform() < cat.missed_call_frac;
                    if (is_missed) {
                        cp.direction = ingest::CallDirection::Missed;
                        cp.duration_s = 0.0;
                    } else {
                        cp.direction = call_rng.rng.uniform() < 0.5 ? ingest::CallDirection::Incoming
                                                                    : ingest::CallDirection::Outgoing;
                        cp.duration_s = round_half_up(std::max(3.0, call_rng.exponential(120.0)), 1);
                    }
                    cp.contact_hash = "c" + std::to_string(call_rng.rng.uniform_index(
                                                static_cast<std::size_t>(std::max(1, cat.contact_pool))));
                    const std::int64_t t = sleep_end_utc +
                                           static_cast<std::int64_t>(call_rng.rng.uniform() *
                                                                     static_cast<double>(waking_span));
                    sink.calls.push_back({pid, t, ingest::SensorKind::CallRecord, cp});
                }
            }
        }
    }

    sort_and_decollide(sink.location);
    sort_and_decollide(sink.screen);
    sort_and_decollide(sink.bluetooth);
    sort_and_decollide(sink.calls);
    sort_and_decollide(sink.steps);
    sort_and_decollide(sink.sleep);

    const auto write_kind = [&](const std::vector<ingest::SensorEvent>& events, ingest::SensorKind kind) {
        write_text_file((fs::path(out_dir) / ingest::sensor_file_name(kind)).string(),
                        ingest::events_to_csv(events, kind));
    };
    write_kind(sink.location, ingest::SensorKind::LocationFix);
    write_kind(sink.screen, ingest::SensorKind::ScreenEvent);
    write_kind(sink.bluetooth, ingest::SensorKind::BluetoothSighting);
    write_kind(sink.calls, ingest::SensorKind::CallRecord);
    write_kind(sink.steps, ingest::SensorKind::StepSample);
    write_kind(sink.sleep, ingest::SensorKind::SleepEpisode);

    {
        std::vector<std::string> header = {"participant_id"};
        for (int i = 1; i <= 10; ++i) header.push_back("item_" + std::to_string(i));
        CsvWriter w((fs::path(out_dir) / "ucla_post.csv").string(), header);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            std::vector<std::string> row = {ids[i]};
            for (int item : ucla_rows[i]) row.push_back(format_int(item));
            w.write_row(row);
        }
        w.close();
    }

    write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest_to_json(manifest).dump(2) + "\n");
    return manifest;
}

json manifest_to_json(const GroundTruthManifest& m) {
    json participants = json::array();
    for (const auto& [id, cat] : m.participants) {
        participants.push_back(json{{"id", id}, {"category", labeling::category_name(cat)}});
    }
    json planted = json::array();
    for (const auto& p : m.planted) planted.push_back(json{{"feature", p.feature}, {"sign", p.sign}});
    return json{{"seed", m.seed},
                {"participants", std::move(participants)},
                {"planted", std::move(planted)},
                {"dominant_feature", m.dominant_feature},
                {"driven_class", labeling::category_name(m.driven_class)},
                {"config", m.config_echo}};
}

GroundTruthManifest manifest_from_json(const json& j) {
    GroundTruthManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& pj : j.at("participants")) {
        m.participants.emplace_back(pj.at("id").get<std::string>(),
                                    labeling::category_from_name(pj.at("category").get<std::string>()));
    }
    for (const auto& pj : j.at("planted")) {
        m.planted.push_back({pj.at("feature").get<std::string>(), pj.at("sign").get<int>()});
    }
    m.dominant_feature = j.at("dominant_feature").get<std::string>();
    m.driven_class = labeling::category_from_name(j.at("driven_class").get<std::string>());
    m.config_echo = j.value("config", json::object());
    return m;
}

bool PlantReport::all_passed() const {
    if (label_mismatches != 0 || checks.empty()) return false;
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

PlantReport verify_plant(const std::string& raw_dir, const GroundTruthManifest& manifest,
                         const CohortConfig& cfg, unsigned jobs) {
    namespace fs = std::filesystem;
    std::vector<std::vector<ingest::SensorEvent>> streams;
    for (int k = 0; k < ingest::kNumSensorKinds; ++k) {
        const auto kind = static_cast<ingest::SensorKind>(k);
        auto parsed = ingest::parse_sensor_file((fs::path(raw_dir) / ingest::sensor_file_name(kind)).string(), kind);
        streams.push_back(std::move(parsed.events));
    }
    const auto merged = ingest::merge_streams(std::move(streams));
    const auto windows = ingest::segment_days(merged, cfg.utc_offset_minutes);

    features::FeatureConfig fc;
    fc.utc_offset_minutes = cfg.utc_offset_minutes;
    const auto extracted = features::extract_features(windows, fc, jobs);

    const auto ucla = labeling::load_ucla_csv((fs::path(raw_dir) / "ucla_post.csv").string());

    PlantReport report;
    std::map<std::string, Category> expected;
    for (const auto& [id, cat] : manifest.participants) expected[id] = cat;
    std::map<std::string, Category> actual;
    for (const auto& a : ucla.assessments) actual[a.participant_id] = a.category;
    for (const auto& [id, cat] : expected) {
        const auto it = actual.find(id);
        if (it == actual.end() || it->second != cat) ++report.label_mismatches;
    }

    // participant-level matrix joined against labels
    std::vector<std::vector<double>> rows;
    std::vector<bool> in_sl, in_el;
    for (const auto& pv : extracted.participants) {
        const auto it = actual.find(pv.participant_id);
        if (it == actual.end()) continue;
        rows.push_back(pv.flat());
        in_sl.push_back(it->second == Category::SociallyLonely);
        in_el.push_back(it->second == Category::EmotionallyLonely);
    }

    stats::CompareOptions opts;
    opts.seed = manifest.seed;
    const auto comparison = stats::compare_groups(features::participant_feature_names(), rows, in_sl, in_el, opts);

    for (const auto& planted : manifest.planted) {
        PlantCheck check;
        check.feature = planted.feature;
        check.expected_sign = planted.sign;
        for (const auto& row : comparison) {
            if (row.feature_name == planted.feature) {
                check.mean_diff = row.mean_diff;
                check.p = row.p_value;
                const int sign = row.mean_diff > 0.0 ? 1 : (row.mean_diff < 0.0 ? -1 : 0);
                check.pass = sign == planted.sign && row.p_value < 0.05;
                break;
            }
        }
        report.checks.push_back(check);
    }
    return report;
}

}  // namespace biomlab::synth
