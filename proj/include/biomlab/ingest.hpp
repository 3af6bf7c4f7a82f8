#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "biomlab/common.hpp"

namespace biomlab::ingest {

enum class SensorKind { LocationFix, ScreenEvent, BluetoothSighting, CallRecord, StepSample, SleepEpisode };
constexpr int kNumSensorKinds = 6;

const char* sensor_kind_name(SensorKind k);       // "location", "screen", ...
const char* sensor_file_name(SensorKind k);       // "locations.csv", ...
const std::vector<std::string>& sensor_header(SensorKind k);

enum class ScreenState { On, Off, Unlock, Lock };
enum class CallDirection { Incoming, Outgoing, Missed };

struct LocationPayload {
    double latitude = 0.0;
    double longitude = 0.0;
    double accuracy_m = 0.0;
    bool operator==(const LocationPayload&) const = default;
};

struct ScreenPayload {
    ScreenState state = ScreenState::On;
    bool operator==(const ScreenPayload&) const = default;
};

struct BluetoothPayload {
    std::string device_hash;
    int rssi = 0;
    bool operator==(const BluetoothPayload&) const = default;
};

struct CallPayload {
    CallDirection direction = CallDirection::Incoming;
    std::string contact_hash;
    double duration_s = 0.0;
    bool operator==(const CallPayload&) const = default;
};

struct StepsPayload {
    std::int64_t step_count = 0;
    bool operator==(const StepsPayload&) const = default;
};

struct SleepPayload {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    double minutes_asleep = 0.0;
    double minutes_awake = 0.0;
    double efficiency = 0.0;  // percent, [0,100]
    bool operator==(const SleepPayload&) const = default;
};

using Payload =
    std::variant<LocationPayload, ScreenPayload, BluetoothPayload, CallPayload, StepsPayload, SleepPayload>;

struct SensorEvent {
    std::string participant_id;
    std::int64_t timestamp_ms = 0;  // UTC; for sleep episodes this is the episode end
    SensorKind kind = SensorKind::LocationFix;
    Payload payload;
    bool operator==(const SensorEvent&) const = default;
};

struct RowError {
    std::string file;
    std::size_t line = 0;  // 1-based, header is line 1
    std::string reason;
};

struct ParseResult {
    std::vector<SensorEvent> events;  // sorted by (participant_id, timestamp), deduplicated
    std::vector<RowError> rejected;
    std::size_t duplicates_removed = 0;
    std::size_t total_rows = 0;
};

// Parses one sensor CSV. Throws ValidationError when the file is unreadable,
// the header does not match the kind's schema, or more than half of the data
// rows are rejected (which signals the wrong schema rather than dirty data).
ParseResult parse_sensor_file(const std::string& path, SensorKind kind);
ParseResult parse_sensor_csv(std::string csv_content, SensorKind kind, const std::string& file_label);

// Serializes events (all of one kind) back to the kind's CSV schema.
std::string events_to_csv(const std::vector<SensorEvent>& events, SensorKind kind);

struct DayWindow {
    std::string participant_id;
    CivilDate local_date;
    std::vector<SensorEvent> events;  // ascending timestamp
};

// Splits a (participant, timestamp)-sorted event stream into fixed-offset
// local-calendar days. Gap days between a participant's first and last event
// are emitted as empty windows.
std::vector<DayWindow> segment_days(const std::vector<SensorEvent>& events, int utc_offset_minutes);

// Merges per-kind streams into one (participant, timestamp)-sorted stream,
// dropping exact duplicates.
std::vector<SensorEvent> merge_streams(std::vector<std::vector<SensorEvent>> streams);

struct CoverageRow {
    std::string participant_id;
    SensorKind kind;
    std::size_t days_with_data = 0;
};

// Non-empty day counts per participant and sensor kind. Every (participant,
// kind) pair is present, including zero counts.
std::vector<CoverageRow> coverage_report(const std::vector<DayWindow>& windows);

std::int64_t local_day_index(std::int64_t timestamp_ms, int utc_offset_minutes);

}  // namespace biomlab::ingest
