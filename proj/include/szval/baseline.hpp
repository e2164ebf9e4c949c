#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "szval/annotations.hpp"
#include "szval/edf.hpp"

namespace szval {

// Trivial line-length detector used for end-to-end integration testing.
// Not a clinical algorithm.
struct BaselineParams {
    double threshold = 50.0;    // microvolts of mean absolute first difference
    double window_seconds = 2.0;
    std::size_t max_channels = 19; // feature averages over the leading channels
};

// Mean absolute sample-to-sample difference over the leading channels,
// evaluated once per second on a centered window.
inline std::vector<double> line_length_profile(const Recording& rec,
                                               const BaselineParams& params) {
    std::size_t n_seconds = static_cast<std::size_t>(std::ceil(rec.duration_seconds));
    std::vector<double> profile(n_seconds, 0.0);
    if (rec.channels.empty() || rec.sample_count() < 2) return profile;

    std::size_t n_channels = std::min(params.max_channels, rec.channels.size());
    double rate = rec.sampling_rate;
    std::ptrdiff_t total = static_cast<std::ptrdiff_t>(rec.sample_count());
    std::ptrdiff_t half = static_cast<std::ptrdiff_t>(params.window_seconds * rate / 2.0);

    for (std::size_t sec = 0; sec < n_seconds; ++sec) {
        std::ptrdiff_t center = static_cast<std::ptrdiff_t>((sec + 0.5) * rate);
        std::ptrdiff_t lo = std::max<std::ptrdiff_t>(1, center - half);
        std::ptrdiff_t hi = std::min(total, center + half);
        if (hi <= lo) continue;
        double acc = 0.0;
        for (std::size_t ch = 0; ch < n_channels; ++ch) {
            const auto& x = rec.channels[ch].samples;
            for (std::ptrdiff_t i = lo; i < hi; ++i)
                acc += std::abs(x[static_cast<std::size_t>(i)] -
                                x[static_cast<std::size_t>(i - 1)]);
        }
        profile[sec] = acc / (static_cast<double>(hi - lo) * n_channels);
    }
    return profile;
}

// Threshold the 1 Hz profile and turn label runs into hypothesis events.
inline EventList detect_baseline(const Recording& rec, const BaselineParams& params) {
    EventList out;
    out.date_time = rec.start_date_time;
    out.recording_duration = rec.duration_seconds;

    std::vector<double> profile = line_length_profile(rec, params);
    std::size_t run_start = 0;
    bool in_run = false;
    auto close_run = [&](std::size_t end_sec) {
        Event e;
        e.onset = static_cast<double>(run_start);
        e.duration = std::min(static_cast<double>(end_sec) - e.onset,
                              rec.duration_seconds - e.onset);
        e.event_type = "sz";
        e.date_time = out.date_time;
        e.recording_duration = out.recording_duration;
        if (e.duration > 0) out.events.push_back(std::move(e));
    };
    for (std::size_t sec = 0; sec < profile.size(); ++sec) {
        bool active = profile[sec] > params.threshold;
        if (active && !in_run) {
            run_start = sec;
            in_run = true;
        } else if (!active && in_run) {
            close_run(sec);
            in_run = false;
        }
    }
    if (in_run) close_run(profile.size());
    return out;
}

} // namespace szval
