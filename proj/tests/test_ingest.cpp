#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "biomlab/ingest.hpp"
#include "biomlab/rng.hpp"

using namespace biomlab;
using namespace biomlab::ingest;

TEST_CASE("parse sorts rows by participant and timestamp") {
    const auto r = parse_sensor_csv("participant_id,timestamp_ms,state\np1,1000,on\np1,500,unlock\n",
                                    SensorKind::ScreenEvent, "screen.csv");
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[0].timestamp_ms == 500);
    CHECK(r.events[1].timestamp_ms == 1000);
    CHECK(r.rejected.empty());
}

TEST_CASE("latitude out of range rejects the row with the stated reason") {
    const auto r = parse_sensor_csv(
        "participant_id,timestamp_ms,latitude,longitude,accuracy_m\n"
        "p1,1000,123.0,10.0,5\n"
        "p1,2000,45.0,10.0,5\n",
        SensorKind::LocationFix, "locations.csv");
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].reason == "latitude out of range");
    CHECK(r.rejected[0].line == 2);
    CHECK(r.events.size() == 1);
}

TEST_CASE("more than half rejected rows is a fatal schema error") {
    std::string csv = "participant_id,timestamp_ms,step_count\n";
    for (int i = 0; i < 4; ++i) csv += "p1," + std::to_string(1000 + i) + ",10\n";
    for (int i = 0; i < 6; ++i) csv += "p1," + std::to_string(2000 + i) + ",abc\n";
    CHECK_THROWS_AS(parse_sensor_csv(csv, SensorKind::StepSample, "steps.csv"), ValidationError);
}

TEST_CASE("wrong header is fatal") {
    CHECK_THROWS_AS(parse_sensor_csv("pid,ts,state\n", SensorKind::ScreenEvent, "screen.csv"), ValidationError);
}

TEST_CASE("per-kind field validation") {
    SUBCASE("missed call with nonzero duration") {
        const auto r = parse_sensor_csv(
            "participant_id,timestamp_ms,direction,contact_hash,duration_s\n"
            "p1,1,missed,c1,10\np1,2,missed,c1,0\np1,3,outgoing,c2,33\n",
            SensorKind::CallRecord, "calls.csv");
        REQUIRE(r.rejected.size() == 1);
        CHECK(r.rejected[0].reason == "missed call with nonzero duration");
        CHECK(r.events.size() == 2);
    }
    SUBCASE("sleep minutes exceeding wall clock") {
        const auto r = parse_sensor_csv(
            "participant_id,start_ms,end_ms,minutes_asleep,minutes_awake,efficiency\n"
            "p1,0,60000,2,0,50\n"
            "p1,0,600000,5,5,50\n",
            SensorKind::SleepEpisode, "sleep.csv");
        REQUIRE(r.rejected.size() == 1);
        CHECK(r.rejected[0].reason == "sleep minutes exceed episode duration");
        REQUIRE(r.events.size() == 1);
        CHECK(r.events[0].timestamp_ms == 600000);  // keyed by episode end
    }
    SUBCASE("negative step count") {
        const auto r = parse_sensor_csv("participant_id,timestamp_ms,step_count\np1,1,-5\np1,2,5\n",
                                        SensorKind::StepSample, "steps.csv");
        REQUIRE(r.rejected.size() == 1);
        CHECK(r.rejected[0].reason == "negative step_count");
    }
}

TEST_CASE("duplicate events dedupe; same timestamp different payload kept") {
    const auto r = parse_sensor_csv(
        "participant_id,timestamp_ms,device_hash,rssi\n"
        "p1,100,aa,-70\n"
        "p1,100,aa,-70\n"
        "p1,100,bb,-70\n",
        SensorKind::BluetoothSighting, "bluetooth.csv");
    CHECK(r.duplicates_removed == 1);
    CHECK(r.events.size() == 2);
}

TEST_CASE("serialize-and-reparse is the identity on parsed events") {
    Rng rng(5);
    std::string csv = "participant_id,timestamp_ms,latitude,longitude,accuracy_m\n";
    for (int i = 0; i < 200; ++i) {
        csv += "p" + std::to_string(1 + static_cast<int>(rng.uniform_int(1, 3))) + "," +
               std::to_string(rng.uniform_int(0, 1000000)) + "," + std::to_string(rng.uniform(-90, 90)) + "," +
               std::to_string(rng.uniform(-180, 180)) + "," + std::to_string(rng.uniform(0, 50)) + "\n";
    }
    const auto first = parse_sensor_csv(csv, SensorKind::LocationFix, "locations.csv");
    const auto serialized = events_to_csv(first.events, SensorKind::LocationFix);
    const auto second = parse_sensor_csv(serialized, SensorKind::LocationFix, "locations.csv");
    CHECK(first.events == second.events);
    CHECK(events_to_csv(second.events, SensorKind::LocationFix) == serialized);
}

namespace {

SensorEvent step_event(const std::string& pid, std::int64_t ts) {
    return {pid, ts, SensorKind::StepSample, StepsPayload{10}};
}

}  // namespace

TEST_CASE("segment_days applies the fixed offset") {
    // 2019-04-01T06:59Z with offset -420 minutes is local 2019-03-31 23:59
    const std::int64_t ts = days_from_civil({2019, 4, 1}) * 86400000LL + 6 * 3600000LL + 59 * 60000LL;
    const auto windows = segment_days({step_event("p1", ts)}, -420);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].local_date == CivilDate{2019, 3, 31});
}

TEST_CASE("segment_days emits empty gap windows") {
    const std::int64_t day0 = days_from_civil({2019, 4, 1}) * 86400000LL + 12 * 3600000LL;
    const std::int64_t day2 = day0 + 2 * 86400000LL;
    const auto windows = segment_days({step_event("p1", day0), step_event("p1", day2)}, 0);
    REQUIRE(windows.size() == 3);
    CHECK(windows[0].events.size() == 1);
    CHECK(windows[1].events.empty());
    CHECK(windows[1].local_date == CivilDate{2019, 4, 2});
    CHECK(windows[2].events.size() == 1);
}

TEST_CASE("segment_days on empty input") {
    CHECK(segment_days({}, 0).empty());
}

TEST_CASE("segment_days rejects offsets beyond +-14h") {
    CHECK_THROWS_AS(segment_days({step_event("p1", 0)}, 15 * 60), ValidationError);
}

TEST_CASE("partition property: every event lands in exactly one window") {
    Rng rng(17);
    std::vector<SensorEvent> events;
    for (int i = 0; i < 500; ++i) {
        events.push_back(step_event("p" + std::to_string(rng.uniform_int(1, 3)),
                                    rng.uniform_int(0, 40LL * 86400000LL)));
    }
    std::stable_sort(events.begin(), events.end(), [](const SensorEvent& a, const SensorEvent& b) {
        if (a.participant_id != b.participant_id) return a.participant_id < b.participant_id;
        return a.timestamp_ms < b.timestamp_ms;
    });
    const auto windows = segment_days(events, -420);
    std::multiset<std::pair<std::string, std::int64_t>> input_keys, output_keys;
    for (const auto& e : events) input_keys.insert({e.participant_id, e.timestamp_ms});
    for (const auto& w : windows) {
        for (const auto& e : w.events) {
            output_keys.insert({e.participant_id, e.timestamp_ms});
            CHECK(local_day_index(e.timestamp_ms, -420) == days_from_civil(w.local_date));
            CHECK(e.participant_id == w.participant_id);
        }
    }
    CHECK(input_keys == output_keys);
}

TEST_CASE("coverage report counts non-empty days per kind, zeros included") {
    const std::int64_t base = days_from_civil({2019, 4, 1}) * 86400000LL;
    std::vector<SensorEvent> events;
    for (int d = 0; d < 70; ++d) {
        events.push_back({"p1", base + d * 86400000LL + 3600000LL, SensorKind::LocationFix,
                          LocationPayload{40.0, -105.0, 10.0}});
    }
    events.push_back(step_event("p2", base + 1000));
    const auto windows = segment_days(events, 0);
    const auto rows = coverage_report(windows);
    REQUIRE(rows.size() == 2 * kNumSensorKinds);
    std::map<std::pair<std::string, int>, std::size_t> got;
    for (const auto& r : rows) got[{r.participant_id, static_cast<int>(r.kind)}] = r.days_with_data;
    CHECK(got[{"p1", static_cast<int>(SensorKind::LocationFix)}] == 70);
    CHECK(got[{"p1", static_cast<int>(SensorKind::ScreenEvent)}] == 0);
    CHECK(got[{"p2", static_cast<int>(SensorKind::StepSample)}] == 1);
}
