#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "szval/datetime.hpp"

namespace szval {

class edf_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Channel {
    std::string name;
    std::vector<double> samples; // microvolts
};

struct Recording {
    std::vector<Channel> channels;
    double sampling_rate = 0.0; // Hz
    DateTime start_date_time;
    double duration_seconds = 0.0;

    std::size_t sample_count() const {
        return channels.empty() ? 0 : channels.front().samples.size();
    }
    const Channel* find_channel(const std::string& name) const {
        for (const Channel& c : channels)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

inline std::string ascii_field(const char* data, std::size_t len) {
    std::string s(data, len);
    std::size_t end = s.find_last_not_of(' ');
    return end == std::string::npos ? std::string{} : s.substr(0, end + 1);
}

inline double parse_edf_number(const std::string& field, const char* what) {
    try {
        std::size_t consumed = 0;
        double v = std::stod(field, &consumed);
        (void)consumed;
        return v;
    } catch (const std::exception&) {
        throw edf_error(std::string("invalid numeric header field (") + what +
                        "): '" + field + "'");
    }
}

inline void put_field(std::string& out, const std::string& value, std::size_t len) {
    std::string v = value;
    if (v.size() > len) v.resize(len);
    v.resize(len, ' ');
    out += v;
}

inline std::string format_edf_number(double v) {
    char buf[32];
    // EDF numeric fields are 8 ASCII chars
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    std::string s = buf;
    if (s.size() > 8) {
        std::snprintf(buf, sizeof(buf), "%.3g", v);
        s = buf;
    }
    return s;
}

// microvolt conversion factor; unconvertible dimensions are an error
inline double unit_scale(const std::string& dim) {
    if (dim.empty() || dim == "uV" || dim == "\xc2\xb5V") return 1.0;
    if (dim == "mV") return 1000.0;
    if (dim == "V") return 1e6;
    throw edf_error("physical dimension '" + dim + "' is not convertible to microvolts");
}

} // namespace detail

inline Recording read_edf(const std::string& bytes) {
    if (bytes.size() < 256) throw edf_error("truncated EDF file: header incomplete");
    const char* p = bytes.data();

    std::string startdate = detail::ascii_field(p + 168, 8);
    std::string starttime = detail::ascii_field(p + 176, 8);
    long n_records = std::lround(detail::parse_edf_number(
        detail::ascii_field(p + 236, 8), "number of records"));
    double record_duration = detail::parse_edf_number(
        detail::ascii_field(p + 244, 8), "record duration");
    long n_signals = std::lround(detail::parse_edf_number(
        detail::ascii_field(p + 252, 4), "signal count"));

    if (n_signals <= 0) throw edf_error("EDF file declares no signals");
    if (n_records <= 0) throw edf_error("EDF file has a zero-length data section");
    if (record_duration <= 0) throw edf_error("non-positive data record duration");

    std::size_t header_size = 256 + 256 * static_cast<std::size_t>(n_signals);
    if (bytes.size() < header_size)
        throw edf_error("truncated EDF file: signal headers incomplete");

    Recording rec;
    int dd = 0, mm = 0, yy = 0, th = 0, tm = 0, ts = 0;
    if (std::sscanf(startdate.c_str(), "%d.%d.%d", &dd, &mm, &yy) != 3 ||
        std::sscanf(starttime.c_str(), "%d.%d.%d", &th, &tm, &ts) != 3)
        throw edf_error("invalid startdate/starttime '" + startdate + "' '" +
                        starttime + "'");
    rec.start_date_time = {yy >= 85 ? 1900 + yy : 2000 + yy, mm, dd, th, tm, ts};

    std::vector<std::string> labels(n_signals), dims(n_signals);
    std::vector<double> phys_min(n_signals), phys_max(n_signals);
    std::vector<double> dig_min(n_signals), dig_max(n_signals);
    std::vector<long> spr(n_signals);
    const char* sp = p + 256;
    auto block = [&](std::size_t field_len) {
        const char* cur = sp;
        sp += field_len * n_signals;
        return cur;
    };
    const char* b_label = block(16);
    block(80); // transducer
    const char* b_dim = block(8);
    const char* b_pmin = block(8);
    const char* b_pmax = block(8);
    const char* b_dmin = block(8);
    const char* b_dmax = block(8);
    block(80); // prefiltering
    const char* b_spr = block(8);
    block(32); // reserved

    std::size_t record_samples = 0;
    for (long s = 0; s < n_signals; ++s) {
        labels[s] = detail::ascii_field(b_label + 16 * s, 16);
        dims[s] = detail::ascii_field(b_dim + 8 * s, 8);
        phys_min[s] = detail::parse_edf_number(detail::ascii_field(b_pmin + 8 * s, 8),
                                               "physical min");
        phys_max[s] = detail::parse_edf_number(detail::ascii_field(b_pmax + 8 * s, 8),
                                               "physical max");
        dig_min[s] = detail::parse_edf_number(detail::ascii_field(b_dmin + 8 * s, 8),
                                              "digital min");
        dig_max[s] = detail::parse_edf_number(detail::ascii_field(b_dmax + 8 * s, 8),
                                              "digital max");
        spr[s] = std::lround(detail::parse_edf_number(
            detail::ascii_field(b_spr + 8 * s, 8), "samples per record"));
        if (spr[s] <= 0) throw edf_error("non-positive samples-per-record");
        if (phys_max[s] == phys_min[s])
            throw edf_error("degenerate physical range on signal '" + labels[s] + "'");
        if (dig_max[s] == dig_min[s])
            throw edf_error("degenerate digital range on signal '" + labels[s] + "'");
        record_samples += static_cast<std::size_t>(spr[s]);
    }
    // all signals must describe the same record duration, so equal-length
    // signals means equal samples-per-record ratios; enforce equal sample rate
    for (long s = 1; s < n_signals; ++s)
        if (spr[s] != spr[0])
            throw edf_error("signals with differing samples-per-record are not supported");

    std::size_t expected = header_size + record_samples * 2 * static_cast<std::size_t>(n_records);
    if (bytes.size() < expected)
        throw edf_error("truncated EDF file: expected " + std::to_string(expected) +
                        " bytes, got " + std::to_string(bytes.size()));

    rec.sampling_rate = static_cast<double>(spr[0]) / record_duration;
    rec.duration_seconds = record_duration * static_cast<double>(n_records);
    rec.channels.resize(n_signals);
    for (long s = 0; s < n_signals; ++s) {
        rec.channels[s].name = labels[s];
        rec.channels[s].samples.reserve(static_cast<std::size_t>(spr[s]) * n_records);
    }

    const unsigned char* data =
        reinterpret_cast<const unsigned char*>(bytes.data()) + header_size;
    for (long r = 0; r < n_records; ++r) {
        for (long s = 0; s < n_signals; ++s) {
            double scale = detail::unit_scale(dims[s]);
            double gain = (phys_max[s] - phys_min[s]) / (dig_max[s] - dig_min[s]);
            for (long i = 0; i < spr[s]; ++i) {
                std::int16_t raw = static_cast<std::int16_t>(
                    static_cast<std::uint16_t>(data[0]) |
                    (static_cast<std::uint16_t>(data[1]) << 8));
                data += 2;
                double value = phys_min[s] + (raw - dig_min[s]) * gain;
                rec.channels[s].samples.push_back(value * scale);
            }
        }
    }
    return rec;
}

// Symmetric physical range: next power of 10 covering the channel's extremes.
inline double edf_physical_range(const std::vector<double>& samples) {
    double max_abs = 0.0;
    for (double v : samples) {
        if (!std::isfinite(v)) throw edf_error("non-finite sample value");
        max_abs = std::max(max_abs, std::abs(v));
    }
    if (max_abs == 0.0) return 1.0;
    return std::pow(10.0, std::ceil(std::log10(max_abs)));
}

inline std::string write_edf(const Recording& rec) {
    if (rec.channels.empty()) throw edf_error("cannot write EDF with no channels");
    if (rec.sampling_rate <= 0) throw edf_error("non-positive sampling rate");
    std::size_t n_samples = rec.channels.front().samples.size();
    for (const Channel& c : rec.channels)
        if (c.samples.size() != n_samples)
            throw edf_error("channels with unequal sample counts");
    if (n_samples == 0) throw edf_error("cannot write EDF with zero samples");

    // 1 s records when the rate is integral and divides the length evenly,
    // otherwise a single record spanning the whole recording
    long spr;
    long n_records;
    double record_duration;
    double int_rate = std::round(rec.sampling_rate);
    if (std::abs(rec.sampling_rate - int_rate) < 1e-9 &&
        n_samples % static_cast<std::size_t>(int_rate) == 0) {
        spr = static_cast<long>(int_rate);
        n_records = static_cast<long>(n_samples / static_cast<std::size_t>(int_rate));
        record_duration = 1.0;
    } else {
        spr = static_cast<long>(n_samples);
        n_records = 1;
        record_duration = static_cast<double>(n_samples) / rec.sampling_rate;
    }

    const long n_signals = static_cast<long>(rec.channels.size());
    std::string out;
    out.reserve(256 + 256 * n_signals + n_samples * 2 * n_signals);

    const DateTime& dt = rec.start_date_time;
    char buf[64];
    detail::put_field(out, "0", 8);
    detail::put_field(out, "X X X X", 80);                       // patient id
    detail::put_field(out, "Startdate X X X X", 80);             // recording id
    std::snprintf(buf, sizeof(buf), "%02d.%02d.%02d", dt.day, dt.month, dt.year % 100);
    detail::put_field(out, buf, 8);
    std::snprintf(buf, sizeof(buf), "%02d.%02d.%02d", dt.hour, dt.minute, dt.second);
    detail::put_field(out, buf, 8);
    detail::put_field(out, std::to_string(256 + 256 * n_signals), 8);
    detail::put_field(out, "", 44);
    detail::put_field(out, std::to_string(n_records), 8);
    detail::put_field(out, detail::format_edf_number(record_duration), 8);
    detail::put_field(out, std::to_string(n_signals), 4);

    std::vector<double> pmin(n_signals), pmax(n_signals);
    for (long s = 0; s < n_signals; ++s) {
        double r = edf_physical_range(rec.channels[s].samples);
        pmin[s] = -r;
        pmax[s] = r;
    }

    for (long s = 0; s < n_signals; ++s) detail::put_field(out, rec.channels[s].name, 16);
    for (long s = 0; s < n_signals; ++s) detail::put_field(out, "", 80);
    for (long s = 0; s < n_signals; ++s) detail::put_field(out, "uV", 8);
    for (long s = 0; s < n_signals; ++s)
        detail::put_field(out, detail::format_edf_number(pmin[s]), 8);
    for (long s = 0; s < n_signals; ++s)
        detail::put_field(out, detail::format_edf_number(pmax[s]), 8);
    for (long s = 0; s < n_signals; ++s) detail::put_field(out, "-32768", 8);
    for (long s = 0; s < n_signals; ++s) detail::put_field(out, "32767", 8);
    for (long s = 0; s < n_signals; ++s) detail::put_field(out, "", 80);
    for (long s = 0; s < n_signals; ++s) detail::put_field(out, std::to_string(spr), 8);
    for (long s = 0; s < n_signals; ++s) detail::put_field(out, "", 32);

    for (long r = 0; r < n_records; ++r) {
        for (long s = 0; s < n_signals; ++s) {
            double gain = 65535.0 / (pmax[s] - pmin[s]);
            const auto& samples = rec.channels[s].samples;
            for (long i = 0; i < spr; ++i) {
                double v = samples[static_cast<std::size_t>(r) * spr + i];
                long dig = std::lround((v - pmin[s]) * gain) - 32768;
                dig = std::clamp(dig, -32768L, 32767L);
                out.push_back(static_cast<char>(dig & 0xff));
                out.push_back(static_cast<char>((dig >> 8) & 0xff));
            }
        }
    }
    return out;
}

inline Recording read_edf_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw edf_error("cannot open EDF file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    return read_edf(bytes);
}

inline void write_edf_file(const std::string& path, const Recording& rec) {
    std::string bytes = write_edf(rec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw edf_error("cannot write EDF file: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace szval
