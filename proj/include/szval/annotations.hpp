#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "szval/datetime.hpp"

namespace szval {

// Error raised by the TSV parser/validator. Carries the offending row
// (1-based, counting the header as row 1) and column name when known.
class annotation_error : public std::runtime_error {
public:
    annotation_error(std::string message, int row = 0, std::string column = {})
        : std::runtime_error(describe(message, row, column)),
          row_(row), column_(std::move(column)) {}

    int row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    static std::string describe(const std::string& msg, int row, const std::string& col) {
        std::string out = msg;
        if (row > 0) out += " (row " + std::to_string(row) + ")";
        if (!col.empty()) out += " [column " + col + "]";
        return out;
    }
    int row_;
    std::string column_;
};

// Hierarchical seizure-type vocabulary. Codes are hyphen-joined paths
// rooted at `sz`; `bckg` marks a recording without seizures.
inline const std::set<std::string>& seizure_type_vocabulary() {
    static const std::set<std::string> vocab = [] {
        std::set<std::string> v;
        v.insert("bckg");
        v.insert("sz");
        const char* foc_awareness[] = {"a", "ia", "ua"};
        const char* foc_motor[] = {"automatisms", "atonic",       "clonic",
                                   "epileptic_spasms", "hyperkinetic", "myoclonic",
                                   "tonic"};
        const char* foc_nonmotor[] = {"autonomic", "behavior_arrest", "cognitive",
                                      "emotional", "sensory"};
        v.insert("sz-foc");
        for (const char* aw : foc_awareness) {
            std::string base = std::string("sz-foc-") + aw;
            v.insert(base);
            v.insert(base + "-m");
            for (const char* m : foc_motor) v.insert(base + "-m-" + m);
            v.insert(base + "-nm");
            for (const char* nm : foc_nonmotor) v.insert(base + "-nm-" + nm);
        }
        v.insert("sz-foc-f2b");
        v.insert("sz-gen");
        v.insert("sz-gen-m");
        for (const char* m : {"tonic_clonic", "clonic", "tonic", "myoclonic",
                              "myoclonic_tonic_clonic", "myoclonic_atonic",
                              "atonic", "epileptic_spasms"})
            v.insert(std::string("sz-gen-m-") + m);
        v.insert("sz-gen-nm");
        for (const char* nm : {"typical", "atypical", "myoclonic", "eyelid_myoclonia"})
            v.insert(std::string("sz-gen-nm-") + nm);
        v.insert("sz-uon");
        v.insert("sz-uon-m");
        v.insert("sz-uon-m-tonic_clonic");
        v.insert("sz-uon-m-epileptic_spasms");
        v.insert("sz-uon-nm");
        v.insert("sz-uon-nm-behavior_arrest");
        v.insert("sz-uon-u");
        return v;
    }();
    return vocab;
}

inline bool is_valid_type_code(const std::string& code) {
    return seizure_type_vocabulary().count(code) != 0;
}

// Ancestry chain from root to the code itself, e.g.
// sz-gen-m-tonic_clonic -> {sz, sz-gen, sz-gen-m, sz-gen-m-tonic_clonic}.
inline std::vector<std::string> validate_type_code(const std::string& code) {
    if (!is_valid_type_code(code))
        throw annotation_error("unknown eventType code '" + code + "'");
    if (code == "bckg") return {"bckg"};
    std::vector<std::string> chain;
    std::size_t pos = 0;
    while (true) {
        pos = code.find('-', pos);
        if (pos == std::string::npos) break;
        chain.push_back(code.substr(0, pos));
        ++pos;
    }
    chain.push_back(code);
    return chain;
}

struct Event {
    double onset = 0.0;              // seconds from recording start
    double duration = 0.0;           // seconds
    std::string event_type = "sz";
    std::optional<double> confidence;             // [0,1] when present
    std::optional<std::vector<std::string>> channels; // names; empty vector means `all`
    DateTime date_time;              // recording start
    double recording_duration = 0.0; // seconds

    bool applies_to_all_channels() const {
        return !channels || channels->empty();
    }
    friend bool operator==(const Event&, const Event&) = default;
};

struct EventList {
    std::vector<Event> events;   // sorted by onset
    DateTime date_time;
    double recording_duration = 0.0;

    friend bool operator==(const EventList&, const EventList&) = default;
};

inline constexpr double kOnsetDurationTolerance = 1e-6;

inline void validate_event(const Event& e, int row = 0) {
    if (!(e.onset >= 0.0))
        throw annotation_error("onset must be non-negative", row, "onset");
    if (!(e.duration > 0.0))
        throw annotation_error("duration must be positive", row, "duration");
    if (e.onset + e.duration > e.recording_duration + kOnsetDurationTolerance)
        throw annotation_error("event extends past end of recording", row, "duration");
    validate_type_code(e.event_type);
    if (e.confidence && (*e.confidence < 0.0 || *e.confidence > 1.0))
        throw annotation_error("confidence outside [0,1]", row, "confidence");
}

inline void validate_event_list(const EventList& list) {
    bool has_bckg = false, has_sz = false;
    for (const Event& e : list.events) {
        validate_event(e);
        if (e.date_time != list.date_time)
            throw annotation_error("event dateTime differs from list dateTime");
        if (e.recording_duration != list.recording_duration)
            throw annotation_error("event recordingDuration differs from list");
        if (e.event_type == "bckg") {
            has_bckg = true;
            if (e.onset != 0.0 ||
                std::abs(e.duration - list.recording_duration) > kOnsetDurationTolerance)
                throw annotation_error("bckg event must span the whole recording");
        } else {
            has_sz = true;
        }
    }
    if (has_bckg && has_sz)
        throw annotation_error("bckg event may not coexist with seizure events");
}

namespace detail {

// Fixed-point rendering, minimum one decimal, trailing zeros stripped.
inline std::string format_seconds(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    std::string s = buf;
    std::size_t last = s.find_last_not_of('0');
    if (s[last] == '.') ++last; // keep one decimal
    s.erase(last + 1);
    return s;
}

// recordingDuration uses two fixed decimals (e.g. 3600.00)
inline std::string format_recording_duration(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

inline std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    std::size_t a = s.find_first_not_of(ws);
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double parse_number(const std::string& field, int row, const char* column) {
    try {
        std::size_t consumed = 0;
        double v = std::stod(field, &consumed);
        if (consumed != field.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw annotation_error("non-numeric value '" + field + "'", row, column);
    }
}

} // namespace detail

inline const std::vector<std::string>& annotation_columns() {
    static const std::vector<std::string> cols = {
        "onset", "duration", "eventType", "confidence",
        "channels", "dateTime", "recordingDuration"};
    return cols;
}

inline EventList parse_annotation_tsv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw annotation_error("empty annotation file, missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = detail::split(line, '\t');
    const auto& expected = annotation_columns();
    if (header.size() != expected.size())
        throw annotation_error("malformed header: expected 7 columns, got " +
                               std::to_string(header.size()), 1);
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (detail::trim(header[i]) != expected[i])
            throw annotation_error("malformed header: column " + std::to_string(i + 1) +
                                   " is '" + detail::trim(header[i]) + "', expected '" +
                                   expected[i] + "'", 1);

    EventList list;
    bool first_row = true;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split(line, '\t');
        if (fields.size() != expected.size())
            throw annotation_error("expected 7 fields, got " +
                                   std::to_string(fields.size()), row);
        for (auto& f : fields) f = detail::trim(f);

        Event e;
        e.onset = detail::parse_number(fields[0], row, "onset");
        e.duration = detail::parse_number(fields[1], row, "duration");
        e.event_type = fields[2];
        if (!is_valid_type_code(e.event_type))
            throw annotation_error("unknown eventType code '" + e.event_type + "'",
                                   row, "eventType");
        if (fields[3] != "n/a")
            e.confidence = detail::parse_number(fields[3], row, "confidence");
        if (fields[4] != "n/a") {
            if (fields[4] == "all")
                e.channels = std::vector<std::string>{};
            else
                e.channels = detail::split(fields[4], ',');
        }
        try {
            e.date_time = parse_datetime(fields[5]);
        } catch (const std::exception& ex) {
            throw annotation_error(ex.what(), row, "dateTime");
        }
        e.recording_duration = detail::parse_number(fields[6], row, "recordingDuration");
        validate_event(e, row);

        if (first_row) {
            list.date_time = e.date_time;
            list.recording_duration = e.recording_duration;
            first_row = false;
        } else {
            if (e.date_time != list.date_time)
                throw annotation_error("inconsistent dateTime across rows", row, "dateTime");
            if (e.recording_duration != list.recording_duration)
                throw annotation_error("inconsistent recordingDuration across rows",
                                       row, "recordingDuration");
        }
        list.events.push_back(std::move(e));
    }
    if (first_row)
        throw annotation_error(
            "annotation file has no data rows; recording metadata must be supplied "
            "by the caller");
    std::stable_sort(list.events.begin(), list.events.end(),
                     [](const Event& a, const Event& b) { return a.onset < b.onset; });
    validate_event_list(list);
    return list;
}

// options.fill_background inserts a single bckg row for an empty list
struct SerializeOptions {
    bool fill_background = false;
};

inline std::string serialize_annotation_tsv(const EventList& list,
                                            SerializeOptions opts = {}) {
    validate_event_list(list);
    std::string out;
    const auto& cols = annotation_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += '\t';
        out += cols[i];
    }
    out += '\n';

    auto append_row = [&](const Event& e) {
        out += detail::format_seconds(e.onset);
        out += '\t';
        out += detail::format_seconds(e.duration);
        out += '\t';
        out += e.event_type;
        out += '\t';
        out += e.confidence ? detail::format_seconds(*e.confidence) : "n/a";
        out += '\t';
        if (!e.channels) {
            out += "n/a";
        } else if (e.channels->empty()) {
            out += "all";
        } else {
            for (std::size_t i = 0; i < e.channels->size(); ++i) {
                if (i) out += ',';
                out += (*e.channels)[i];
            }
        }
        out += '\t';
        out += format_datetime(e.date_time);
        out += '\t';
        out += detail::format_recording_duration(e.recording_duration);
        out += '\n';
    };

    if (list.events.empty() && opts.fill_background) {
        Event bg;
        bg.onset = 0.0;
        bg.duration = list.recording_duration;
        bg.event_type = "bckg";
        bg.date_time = list.date_time;
        bg.recording_duration = list.recording_duration;
        append_row(bg);
    }
    for (const Event& e : list.events) append_row(e);
    return out;
}

// Keep events whose type ancestry contains `filter`; bckg never matches a
// seizure filter.
inline EventList events_of_type(const EventList& list, const std::string& filter) {
    validate_type_code(filter);
    EventList out;
    out.date_time = list.date_time;
    out.recording_duration = list.recording_duration;
    for (const Event& e : list.events) {
        auto chain = validate_type_code(e.event_type);
        if (std::find(chain.begin(), chain.end(), filter) != chain.end())
            out.events.push_back(e);
    }
    return out;
}

// All seizure events (everything under `sz`), dropping bckg.
inline EventList seizure_events(const EventList& list) {
    return events_of_type(list, "sz");
}

} // namespace szval
