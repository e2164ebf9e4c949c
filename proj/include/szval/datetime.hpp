#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace szval {

// Calendar timestamp with second resolution. Recordings carry no timezone,
// so this is a plain civil datetime, not a UTC time_point.
struct DateTime {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;

    friend bool operator==(const DateTime&, const DateTime&) = default;
};

namespace detail {

// days since 1970-01-01 for a civil date (proleptic Gregorian)
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u
                         + static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

} // namespace detail

// seconds since 1970-01-01 00:00:00, used for wall-clock chronology
inline std::int64_t to_epoch_seconds(const DateTime& dt) {
    return detail::days_from_civil(dt.year, dt.month, dt.day) * 86400
           + dt.hour * 3600 + dt.minute * 60 + dt.second;
}

// "%Y-%m-%d %H:%M:%S"
inline std::string format_datetime(const DateTime& dt) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d",
                  dt.year, dt.month, dt.day, dt.hour, dt.minute, dt.second);
    return buf;
}

inline DateTime parse_datetime(const std::string& text) {
    DateTime dt;
    char trailing = 0;
    int n = std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%d%c",
                        &dt.year, &dt.month, &dt.day,
                        &dt.hour, &dt.minute, &dt.second, &trailing);
    if (n != 6)
        throw std::invalid_argument("invalid dateTime '" + text +
                                    "', expected %Y-%m-%d %H:%M:%S");
    if (dt.month < 1 || dt.month > 12 || dt.day < 1 || dt.day > 31 ||
        dt.hour > 23 || dt.hour < 0 || dt.minute > 59 || dt.minute < 0 ||
        dt.second > 59 || dt.second < 0)
        throw std::invalid_argument("out-of-range dateTime '" + text + "'");
    return dt;
}

} // namespace szval
