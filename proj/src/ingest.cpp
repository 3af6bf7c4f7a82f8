#include "biomlab/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "biomlab/csv.hpp"

namespace biomlab::ingest {

namespace {

const std::vector<std::string> kLocationHeader = {"participant_id", "timestamp_ms", "latitude", "longitude",
                                                  "accuracy_m"};
const std::vector<std::string> kScreenHeader = {"participant_id", "timestamp_ms", "state"};
const std::vector<std::string> kBluetoothHeader = {"participant_id", "timestamp_ms", "device_hash", "rssi"};
const std::vector<std::string> kCallHeader = {"participant_id", "timestamp_ms", "direction", "contact_hash",
                                              "duration_s"};
const std::vector<std::string> kStepsHeader = {"participant_id", "timestamp_ms", "step_count"};
const std::vector<std::string> kSleepHeader = {"participant_id", "start_ms", "end_ms", "minutes_asleep",
                                               "minutes_awake", "efficiency"};

constexpr std::int64_t kMsPerDay = 86400000;

}  // namespace

const char* sensor_kind_name(SensorKind k) {
    switch (k) {
        case SensorKind::LocationFix: return "location";
        case SensorKind::ScreenEvent: return "screen";
        case SensorKind::BluetoothSighting: return "bluetooth";
        case SensorKind::CallRecord: return "calls";
        case SensorKind::StepSample: return "steps";
        case SensorKind::SleepEpisode: return "sleep";
    }
    return "?";
}

const char* sensor_file_name(SensorKind k) {
    switch (k) {
        case SensorKind::LocationFix: return "locations.csv";
        case SensorKind::ScreenEvent: return "screen.csv";
        case SensorKind::BluetoothSighting: return "bluetooth.csv";
        case SensorKind::CallRecord: return "calls.csv";
        case SensorKind::StepSample: return "steps.csv";
        case SensorKind::SleepEpisode: return "sleep.csv";
    }
    return "?";
}

const std::vector<std::string>& sensor_header(SensorKind k) {
    switch (k) {
        case SensorKind::LocationFix: return kLocationHeader;
        case SensorKind::ScreenEvent: return kScreenHeader;
        case SensorKind::BluetoothSighting: return kBluetoothHeader;
        case SensorKind::CallRecord: return kCallHeader;
        case SensorKind::StepSample: return kStepsHeader;
        case SensorKind::SleepEpisode: return kSleepHeader;
    }
    return kLocationHeader;
}

namespace {

struct RowParser {
    const std::vector<std::string_view>& f;
    std::string error;

    bool fail(std::string reason) {
        if (error.empty()) error = std::move(reason);
        return false;
    }

    bool get_int(std::size_t idx, const char* name, std::int64_t& out) {
        auto v = parse_int(f[idx]);
        if (!v) return fail(std::string("non-integer ") + name);
        out = *v;
        return true;
    }

    bool get_double(std::size_t idx, const char* name, double& out) {
        auto v = parse_double(f[idx]);
        if (!v || !std::isfinite(*v)) return fail(std::string("non-numeric ") + name);
        out = *v;
        return true;
    }
};

bool parse_payload(SensorKind kind, RowParser& p, SensorEvent& ev) {
    const auto& f = p.f;
    switch (kind) {
        case SensorKind::LocationFix: {
            LocationPayload loc;
            if (!p.get_int(1, "timestamp_ms", ev.timestamp_ms)) return false;
            if (!p.get_double(2, "latitude", loc.latitude)) return false;
            if (!p.get_double(3, "longitude", loc.longitude)) return false;
            if (!p.get_double(4, "accuracy_m", loc.accuracy_m)) return false;
            if (loc.latitude < -90.0 || loc.latitude > 90.0) return p.fail("latitude out of range");
            if (loc.longitude < -180.0 || loc.longitude > 180.0) return p.fail("longitude out of range");
            if (loc.accuracy_m < 0.0) return p.fail("accuracy negative");
            ev.payload = loc;
            return true;
        }
        case SensorKind::ScreenEvent: {
            ScreenPayload sp;
            if (!p.get_int(1, "timestamp_ms", ev.timestamp_ms)) return false;
            if (f[2] == "on") sp.state = ScreenState::On;
            else if (f[2] == "off") sp.state = ScreenState::Off;
            else if (f[2] == "unlock") sp.state = ScreenState::Unlock;
            else if (f[2] == "lock") sp.state = ScreenState::Lock;
            else return p.fail("invalid screen state");
            ev.payload = sp;
            return true;
        }
        case SensorKind::BluetoothSighting: {
            BluetoothPayload bt;
            if (!p.get_int(1, "timestamp_ms", ev.timestamp_ms)) return false;
            if (f[2].empty()) return p.fail("empty device_hash");
            bt.device_hash = std::string(f[2]);
            std::int64_t rssi = 0;
            if (!p.get_int(3, "rssi", rssi)) return false;
            bt.rssi = static_cast<int>(rssi);
            ev.payload = bt;
            return true;
        }
        case SensorKind::CallRecord: {
            CallPayload call;
            if (!p.get_int(1, "timestamp_ms", ev.timestamp_ms)) return false;
            if (f[2] == "incoming") call.direction = CallDirection::Incoming;
            else if (f[2] == "outgoing") call.direction = CallDirection::Outgoing;
            else if (f[2] == "missed") call.direction = CallDirection::Missed;
            else return p.fail("invalid call direction");
            if (f[3].empty()) return p.fail("empty contact_hash");
            call.contact_hash = std::string(f[3]);
            if (!p.get_double(4, "duration_s", call.duration_s)) return false;
            if (call.duration_s < 0.0) return p.fail("negative duration_s");
            if (call.direction == CallDirection::Missed && call.duration_s != 0.0) {
                return p.fail("missed call with nonzero duration");
            }
            ev.payload = call;
            return true;
        }
        case SensorKind::StepSample: {
            StepsPayload st;
            if (!p.get_int(1, "timestamp_ms", ev.timestamp_ms)) return false;
            if (!p.get_int(2, "step_count", st.step_count)) return false;
            if (st.step_count < 0) return p.fail("negative step_count");
            ev.payload = st;
            return true;
        }
        case SensorKind::SleepEpisode: {
            SleepPayload sl;
            if (!p.get_int(1, "start_ms", sl.start_ms)) return false;
            if (!p.get_int(2, "end_ms", sl.end_ms)) return false;
            if (!p.get_double(3, "minutes_asleep", sl.minutes_asleep)) return false;
            if (!p.get_double(4, "minutes_awake", sl.minutes_awake)) return false;
            if (!p.get_double(5, "efficiency", sl.efficiency)) return false;
            if (sl.end_ms <= sl.start_ms) return p.fail("episode end not after start");
            if (sl.minutes_asleep < 0.0) return p.fail("negative minutes_asleep");
            if (sl.minutes_awake < 0.0) return p.fail("negative minutes_awake");
            if (sl.efficiency < 0.0 || sl.efficiency > 100.0) return p.fail("efficiency out of range");
            const double wall_min = static_cast<double>(sl.end_ms - sl.start_ms) / 60000.0;
            if (sl.minutes_asleep + sl.minutes_awake > wall_min + 1e-9) {
                return p.fail("sleep minutes exceed episode duration");
            }
            ev.timestamp_ms = sl.end_ms;  // episodes belong to the day they end
            ev.payload = sl;
            return true;
        }
    }
    return p.fail("unknown sensor kind");
}

}  // namespace

ParseResult parse_sensor_csv(std::string csv_content, SensorKind kind, const std::string& file_label) {
    CsvReader reader(std::move(csv_content));
    const auto& expected = sensor_header(kind);
    if (reader.header() != expected) {
        throw ValidationError(file_label + ": header does not match the " +
                              std::string(sensor_kind_name(kind)) + " schema");
    }

    ParseResult result;
    std::vector<std::string_view> fields;
    while (reader.next_row(fields)) {
        ++result.total_rows;
        if (fields.size() != expected.size()) {
            result.rejected.push_back({file_label, reader.line_number(), "wrong field count"});
            continue;
        }
        SensorEvent ev;
        ev.kind = kind;
        ev.participant_id = std::string(fields[0]);
        if (ev.participant_id.empty()) {
            result.rejected.push_back({file_label, reader.line_number(), "empty participant_id"});
            continue;
        }
        RowParser parser{fields, {}};
        if (!parse_payload(kind, parser, ev)) {
            result.rejected.push_back({file_label, reader.line_number(), parser.error});
            continue;
        }
        result.events.push_back(std::move(ev));
    }

    if (result.total_rows > 0 && result.rejected.size() * 2 > result.total_rows) {
        throw ValidationError(file_label + ": " + std::to_string(result.rejected.size()) + " of " +
                              std::to_string(result.total_rows) +
                              " rows rejected; input does not match the expected schema");
    }

    std::stable_sort(result.events.begin(), result.events.end(), [](const SensorEvent& a, const SensorEvent& b) {
        if (a.participant_id != b.participant_id) return a.participant_id < b.participant_id;
        return a.timestamp_ms < b.timestamp_ms;
    });
    // Identical (participant, timestamp, payload) rows are sensor re-sends;
    // same timestamp with a different payload is kept.
    const auto first_dup = std::unique(result.events.begin(), result.events.end());
    result.duplicates_removed = static_cast<std::size_t>(std::distance(first_dup, result.events.end()));
    result.events.erase(first_dup, result.events.end());
    return result;
}

ParseResult parse_sensor_file(const std::string& path, SensorKind kind) {
    return parse_sensor_csv(read_text_file(path), kind, path);
}

std::string events_to_csv(const std::vector<SensorEvent>& events, SensorKind kind) {
    std::string out;
    const auto& header = sensor_header(kind);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& ev : events) {
        out += ev.participant_id;
        switch (kind) {
            case SensorKind::LocationFix: {
                const auto& p = std::get<LocationPayload>(ev.payload);
                out += ',' + format_int(ev.timestamp_ms) + ',' + format_double(p.latitude) + ',' +
                       format_double(p.longitude) + ',' + format_double(p.accuracy_m);
                break;
            }
            case SensorKind::ScreenEvent: {
                const auto& p = std::get<ScreenPayload>(ev.payload);
                const char* s = p.state == ScreenState::On      ? "on"
                                : p.state == ScreenState::Off   ? "off"
                                : p.state == ScreenState::Unlock ? "unlock"
                                                                 : "lock";
                out += ',' + format_int(ev.timestamp_ms) + ',' + s;
                break;
            }
            case SensorKind::BluetoothSighting: {
                const auto& p = std::get<BluetoothPayload>(ev.payload);
                out += ',' + format_int(ev.timestamp_ms) + ',' + p.device_hash + ',' + format_int(p.rssi);
                break;
            }
            case SensorKind::CallRecord: {
                const auto& p = std::get<CallPayload>(ev.payload);
                const char* d = p.direction == CallDirection::Incoming   ? "incoming"
                                : p.direction == CallDirection::Outgoing ? "outgoing"
                                                                         : "missed";
                out += ',' + format_int(ev.timestamp_ms) + ',' + d + ',' + p.contact_hash + ',' +
                       format_double(p.duration_s);
                break;
            }
            case SensorKind::StepSample: {
                const auto& p = std::get<StepsPayload>(ev.payload);
                out += ',' + format_int(ev.timestamp_ms) + ',' + format_int(p.step_count);
                break;
            }
            case SensorKind::SleepEpisode: {
                const auto& p = std::get<SleepPayload>(ev.payload);
                out += ',' + format_int(p.start_ms) + ',' + format_int(p.end_ms) + ',' +
                       format_double(p.minutes_asleep) + ',' + format_double(p.minutes_awake) + ',' +
                       format_double(p.efficiency);
                break;
            }
        }
        out += '\n';
    }
    return out;
}

std::int64_t local_day_index(std::int64_t timestamp_ms, int utc_offset_minutes) {
    const std::int64_t local = timestamp_ms + static_cast<std::int64_t>(utc_offset_minutes) * 60000;
    // floor division towards -infinity
    std::int64_t day = local / kMsPerDay;
    if (local % kMsPerDay < 0) --day;
    return day;
}

std::vector<SensorEvent> merge_streams(std::vector<std::vector<SensorEvent>> streams) {
    std::vector<SensorEvent> all;
    std::size_t total = 0;
    for (const auto& s : streams) total += s.size();
    all.reserve(total);
    for (auto& s : streams) {
        all.insert(all.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    }
    std::stable_sort(all.begin(), all.end(), [](const SensorEvent& a, const SensorEvent& b) {
        if (a.participant_id != b.participant_id) return a.participant_id < b.participant_id;
        if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms < b.timestamp_ms;
        return a.kind < b.kind;
    });
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

std::vector<DayWindow> segment_days(const std::vector<SensorEvent>& events, int utc_offset_minutes) {
    if (std::abs(utc_offset_minutes) > 14 * 60) {
        throw ValidationError("utc_offset_minutes outside +-14h: " + std::to_string(utc_offset_minutes));
    }
    std::vector<DayWindow> windows;
    std::size_t i = 0;
    while (i < events.size()) {
        const std::string& pid = events[i].participant_id;
        std::size_t j = i;
        while (j < events.size() && events[j].participant_id == pid) ++j;

        const std::int64_t first_day = local_day_index(events[i].timestamp_ms, utc_offset_minutes);
        const std::int64_t last_day = local_day_index(events[j - 1].timestamp_ms, utc_offset_minutes);
        const std::size_t base = windows.size();
        for (std::int64_t d = first_day; d <= last_day; ++d) {
            windows.push_back(DayWindow{pid, civil_from_days(d), {}});
        }
        for (std::size_t k = i; k < j; ++k) {
            const std::int64_t d = local_day_index(events[k].timestamp_ms, utc_offset_minutes);
            windows[base + static_cast<std::size_t>(d - first_day)].events.push_back(events[k]);
        }
        i = j;
    }
    return windows;
}

std::vector<CoverageRow> coverage_report(const std::vector<DayWindow>& windows) {
    std::map<std::string, std::array<std::set<CivilDate>, kNumSensorKinds>> per_participant;
    for (const auto& w : windows) {
        auto& sets = per_participant[w.participant_id];
        for (const auto& ev : w.events) {
            sets[static_cast<std::size_t>(ev.kind)].insert(w.local_date);
        }
    }
    std::vector<CoverageRow> rows;
    rows.reserve(per_participant.size() * kNumSensorKinds);
    for (const auto& [pid, sets] : per_participant) {
        for (int k = 0; k < kNumSensorKinds; ++k) {
            rows.push_back({pid, static_cast<SensorKind>(k), sets[static_cast<std::size_t>(k)].size()});
        }
    }
    return rows;
}

}  // namespace biomlab::ingest
