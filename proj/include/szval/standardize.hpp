#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "szval/edf.hpp"

namespace szval {

class standardize_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kCanonicalRate = 256.0;

// The 19 channels of the 10-20 system in normative order.
inline const std::array<std::string, 19>& canonical_channels() {
    static const std::array<std::string, 19> names = {
        "Fp1", "F3", "C3", "P3", "O1", "F7", "T3", "T5", "Fz", "Cz",
        "Pz",  "Fp2", "F4", "C4", "P4", "O2", "F8", "T4", "T6"};
    return names;
}

namespace detail {

inline std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

inline bool strip_suffix(std::string& name, const std::string& suffix) {
    if (name.size() >= suffix.size() &&
        upper(name.substr(name.size() - suffix.size())) == upper(suffix)) {
        name.erase(name.size() - suffix.size());
        return true;
    }
    return false;
}

} // namespace detail

// Fold one channel name to its canonical electrode label. "EEG " prefixes
// and reference suffixes are stripped; modern temporal names map to the
// older 10-20 labels (T7->T3, T8->T4, P7->T5, P8->T6). Unknown names pass
// through unchanged.
inline std::string normalize_channel_name(const std::string& raw) {
    std::string name = raw;
    if (detail::upper(name).rfind("EEG ", 0) == 0) name.erase(0, 4);
    while (!name.empty() && (name.front() == ' ' || name.back() == ' ')) {
        if (name.front() == ' ') name.erase(name.begin());
        else name.pop_back();
    }
    for (const char* suffix : {"-REF", "-LE", "-Avg", "-AVG", "-A1", "-A2"})
        if (detail::strip_suffix(name, suffix)) break;

    static const std::map<std::string, std::string> equivalents = {
        {"T7", "T3"}, {"T8", "T4"}, {"P7", "T5"}, {"P8", "T6"}};
    std::string up = detail::upper(name);
    for (const auto& [modern, legacy] : equivalents)
        if (up == modern) return legacy;
    for (const std::string& canon : canonical_channels())
        if (up == detail::upper(canon)) return canon;
    return name;
}

inline Recording normalize_channel_names(Recording rec) {
    for (Channel& c : rec.channels) c.name = normalize_channel_name(c.name);
    return rec;
}

// Does the name look like a bipolar derivation (two electrode labels joined
// by a dash, e.g. FP1-F7)?
inline bool is_bipolar_channel_name(const std::string& name) {
    std::size_t dash = name.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 >= name.size()) return false;
    auto is_electrode = [](const std::string& part) {
        std::string canon = normalize_channel_name(part);
        for (const std::string& c : canonical_channels())
            if (c == canon) return true;
        std::string up = detail::upper(canon);
        return up == "A1" || up == "A2" || up == "FT9" || up == "FT10";
    };
    return is_electrode(name.substr(0, dash)) && is_electrode(name.substr(dash + 1));
}

// Subtract the per-sample mean of the given channel indices from each of
// those channels. Channels outside the set are untouched.
inline void apply_common_average(Recording& rec, const std::vector<std::size_t>& indices) {
    if (indices.empty()) return;
    std::size_t n = rec.sample_count();
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (std::size_t ch : indices) mean += rec.channels[ch].samples[i];
        mean /= static_cast<double>(indices.size());
        for (std::size_t ch : indices) rec.channels[ch].samples[i] -= mean;
    }
}

inline Recording rereference_common_average(Recording rec) {
    std::vector<std::size_t> indices;
    for (const std::string& name : canonical_channels()) {
        bool found = false;
        for (std::size_t i = 0; i < rec.channels.size(); ++i) {
            if (rec.channels[i].name == name) {
                indices.push_back(i);
                found = true;
                break;
            }
        }
        if (!found)
            throw standardize_error("canonical channel '" + name +
                                    "' missing; cannot compute common average");
    }
    apply_common_average(rec, indices);
    return rec;
}

namespace detail {

// Windowed-sinc interpolation kernel. cutoff_ratio is the passband edge as
// a fraction of the input Nyquist frequency.
struct SincKernel {
    double cutoff_ratio;
    int half_width;

    double operator()(double u) const {
        if (std::abs(u) >= half_width) return 0.0;
        double x = std::numbers::pi * u;
        double sinc = (std::abs(x) < 1e-12) ? cutoff_ratio
                                            : std::sin(cutoff_ratio * x) / x;
        // Blackman window over [-half_width, half_width]
        double w = 0.42 + 0.5 * std::cos(std::numbers::pi * u / half_width)
                   + 0.08 * std::cos(2.0 * std::numbers::pi * u / half_width);
        return sinc * w;
    }
};

inline std::vector<double> resample_channel(const std::vector<double>& in,
                                            double in_rate, double out_rate,
                                            std::size_t out_count) {
    // anti-aliasing cutoff at 0.9x the narrower Nyquist
    double cutoff_hz = 0.45 * std::min(in_rate, out_rate);
    SincKernel kernel{2.0 * cutoff_hz / in_rate, 32};

    std::vector<double> out(out_count, 0.0);
    const double step = in_rate / out_rate;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.size());
    for (std::size_t m = 0; m < out_count; ++m) {
        double center = static_cast<double>(m) * step;
        std::ptrdiff_t k0 = static_cast<std::ptrdiff_t>(std::ceil(center - kernel.half_width));
        std::ptrdiff_t k1 = static_cast<std::ptrdiff_t>(std::floor(center + kernel.half_width));
        double acc = 0.0, norm = 0.0;
        for (std::ptrdiff_t k = k0; k <= k1; ++k) {
            double w = kernel(static_cast<double>(k) - center);
            norm += w;
            if (k >= 0 && k < n) acc += in[static_cast<std::size_t>(k)] * w;
        }
        out[m] = (norm != 0.0) ? acc / norm : 0.0;
    }
    return out;
}

} // namespace detail

struct ResampleOptions {
    bool allow_upsample_from_below_256 = false;
};

inline Recording resample(const Recording& rec, double target_rate,
                          ResampleOptions opts = {}) {
    if (target_rate <= 0) throw standardize_error("non-positive target sampling rate");
    if (rec.sampling_rate == target_rate) return rec;
    if (target_rate == kCanonicalRate && rec.sampling_rate < kCanonicalRate &&
        !opts.allow_upsample_from_below_256)
        throw standardize_error(
            "input sampling rate " + std::to_string(rec.sampling_rate) +
            " Hz is below the 256 Hz acquisition minimum; pass the override "
            "flag to upsample anyway");

    Recording out = rec;
    out.sampling_rate = target_rate;
    std::size_t out_count = static_cast<std::size_t>(
        std::llround(rec.duration_seconds * target_rate));
    for (Channel& c : out.channels)
        c.samples = detail::resample_channel(c.samples, rec.sampling_rate,
                                             target_rate, out_count);
    return out;
}

struct CanonicalRecording {
    Recording recording;                     // 19 canonical channels first, then extras
    std::vector<std::string> zero_filled;    // canonical channels substituted with zeros
    bool bipolar_passthrough = false;        // CHB-MIT style input left untouched
};

struct CanonicalizeOptions {
    bool zero_fill_missing = false;
    ResampleOptions resample;
};

// normalize names -> order the 19 canonical channels (zero-filling if
// requested) -> common average over non-zero-filled canonical channels ->
// resample everything to 256 Hz. Extra channels follow the canonical 19.
inline CanonicalRecording canonicalize(const Recording& input,
                                       CanonicalizeOptions opts = {}) {
    Recording rec = normalize_channel_names(input);

    std::size_t n = rec.sample_count();
    std::vector<bool> used(rec.channels.size(), false);

    Recording ordered;
    ordered.sampling_rate = rec.sampling_rate;
    ordered.start_date_time = rec.start_date_time;
    ordered.duration_seconds = rec.duration_seconds;

    CanonicalRecording result;
    std::vector<std::size_t> average_set;
    for (const std::string& name : canonical_channels()) {
        bool found = false;
        for (std::size_t i = 0; i < rec.channels.size(); ++i) {
            if (!used[i] && rec.channels[i].name == name) {
                average_set.push_back(ordered.channels.size());
                ordered.channels.push_back(std::move(rec.channels[i]));
                used[i] = true;
                found = true;
                break;
            }
        }
        if (found) continue;
        if (!opts.zero_fill_missing) {
            std::size_t bipolar = 0;
            for (const Channel& c : rec.channels)
                if (is_bipolar_channel_name(c.name)) ++bipolar;
            std::string hint;
            if (bipolar > 0 && bipolar >= rec.channels.size() / 2)
                hint = "; input looks bipolar (e.g. CHB-MIT), use the bipolar "
                       "passthrough path instead of canonicalization";
            throw standardize_error("canonical channel '" + name +
                                    "' missing and zero-fill not requested" + hint);
        }
        ordered.channels.push_back({name, std::vector<double>(n, 0.0)});
        result.zero_filled.push_back(name);
    }
    for (std::size_t i = 0; i < rec.channels.size(); ++i)
        if (!used[i]) ordered.channels.push_back(std::move(rec.channels[i]));

    // zero-filled electrodes are excluded from the common average
    apply_common_average(ordered, average_set);

    result.recording = resample(ordered, kCanonicalRate, opts.resample);
    return result;
}

} // namespace szval
