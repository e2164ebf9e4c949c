#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "szval/annotations.hpp"

namespace szval {

// Half-open time interval [start, end) in seconds. A shared endpoint is
// not an overlap; split siblings are adjacent, not overlapping.
struct Interval {
    double start = 0.0;
    double end = 0.0;

    double length() const { return end - start; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

inline double overlap_length(const Interval& a, const Interval& b) {
    return std::min(a.end, b.end) - std::max(a.start, b.start);
}

// Event-scoring rule parameters. Defaults: 30 s pre-ictal, 60 s post-ictal,
// 90 s merge gap, 300 s max event duration, any positive overlap.
struct ScoringParams {
    double pre_ictal_tolerance = 30.0;
    double post_ictal_tolerance = 60.0;
    double merge_gap = 90.0;
    double max_event_duration = 300.0;
    double min_overlap = 0.0; // 0 = any positive overlap

    void validate() const {
        if (pre_ictal_tolerance < 0 || post_ictal_tolerance < 0 || merge_gap < 0 ||
            max_event_duration < 0 || min_overlap < 0)
            throw std::invalid_argument("scoring parameters must be non-negative");
    }
};

enum class CountKind { sample, event };

struct ScoreCounts {
    CountKind kind = CountKind::event;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t ref_true = 0;          // reference positives (events or samples)
    double total_duration_seconds = 0.0;

    std::int64_t fn() const { return ref_true - tp; }
    friend bool operator==(const ScoreCounts&, const ScoreCounts&) = default;
};

struct Metrics {
    std::optional<double> sensitivity;
    std::optional<double> precision;
    std::optional<double> f1;
    double fp_per_day = 0.0;
};

// Binary seizure labels at 1 Hz; sample i covers window [i, i+1) seconds.
struct LabelMask {
    std::vector<std::uint8_t> labels;
    double origin_recording_duration = 0.0;

    std::size_t length_seconds() const { return labels.size(); }
};

inline std::vector<Interval> event_intervals(const EventList& list) {
    std::vector<Interval> out;
    for (const Event& e : seizure_events(list).events)
        out.push_back({e.onset, e.onset + e.duration});
    return out;
}

// Union of possibly overlapping intervals, sorted by start.
inline std::vector<Interval> union_intervals(std::vector<Interval> intervals) {
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.start < b.start; });
    std::vector<Interval> out;
    for (const Interval& iv : intervals) {
        if (!out.empty() && iv.start < out.back().end)
            out.back().end = std::max(out.back().end, iv.end);
        else
            out.push_back(iv);
    }
    return out;
}

// Sample i is labeled seizure iff the union of seizure intervals overlaps
// [i, i+1) by strictly more than 0.5 s.
inline LabelMask events_to_mask(const EventList& list) {
    LabelMask mask;
    mask.origin_recording_duration = list.recording_duration;
    mask.labels.assign(static_cast<std::size_t>(std::ceil(list.recording_duration)), 0);

    for (const Interval& iv : union_intervals(event_intervals(list))) {
        std::size_t first = static_cast<std::size_t>(std::max(0.0, std::floor(iv.start)));
        for (std::size_t i = first; i < mask.labels.size(); ++i) {
            Interval window{static_cast<double>(i), static_cast<double>(i + 1)};
            if (window.start >= iv.end) break;
            if (overlap_length(window, iv) > 0.5) mask.labels[i] = 1;
        }
    }
    return mask;
}

inline ScoreCounts score_samples(const LabelMask& ref, const LabelMask& hyp) {
    if (ref.labels.size() != hyp.labels.size())
        throw std::invalid_argument("label mask length mismatch: " +
                                    std::to_string(ref.labels.size()) + " vs " +
                                    std::to_string(hyp.labels.size()));
    ScoreCounts c;
    c.kind = CountKind::sample;
    c.total_duration_seconds = static_cast<double>(ref.labels.size());
    for (std::size_t i = 0; i < ref.labels.size(); ++i) {
        if (ref.labels[i]) ++c.ref_true;
        if (hyp.labels[i]) {
            if (ref.labels[i]) ++c.tp;
            else ++c.fp;
        }
    }
    return c;
}

// Merge/split pipeline applied identically to reference and hypothesis:
// union overlapping intervals, merge neighbors with gap < merge_gap, then
// split intervals longer than max_event_duration into adjacent chunks.
inline std::vector<Interval> preprocess_events(std::vector<Interval> intervals,
                                               const ScoringParams& params) {
    params.validate();
    std::vector<Interval> merged = union_intervals(std::move(intervals));

    std::vector<Interval> gap_merged;
    for (const Interval& iv : merged) {
        if (!gap_merged.empty() && iv.start - gap_merged.back().end < params.merge_gap)
            gap_merged.back().end = iv.end;
        else
            gap_merged.push_back(iv);
    }

    std::vector<Interval> out;
    for (const Interval& iv : gap_merged) {
        if (params.max_event_duration <= 0 || iv.length() <= params.max_event_duration) {
            out.push_back(iv);
            continue;
        }
        double pos = iv.start;
        while (iv.end - pos > params.max_event_duration) {
            out.push_back({pos, pos + params.max_event_duration});
            pos += params.max_event_duration;
        }
        if (pos < iv.end) out.push_back({pos, iv.end});
    }
    return out;
}

// Event-based scoring: preprocess both sides, extend reference intervals by
// the tolerances (clipped to the recording), then match by overlap. One
// hypothesis can detect several references; several hypotheses on one
// reference still count a single TP.
inline ScoreCounts score_events(const EventList& ref, const EventList& hyp,
                                const ScoringParams& params = {}) {
    if (ref.recording_duration != hyp.recording_duration)
        throw std::invalid_argument("recordingDuration mismatch between reference "
                                    "and hypothesis");
    params.validate();

    auto ref_iv = preprocess_events(event_intervals(ref), params);
    auto hyp_iv = preprocess_events(event_intervals(hyp), params);

    std::vector<Interval> extended;
    extended.reserve(ref_iv.size());
    for (const Interval& iv : ref_iv)
        extended.push_back({std::max(0.0, iv.start - params.pre_ictal_tolerance),
                            std::min(ref.recording_duration,
                                     iv.end + params.post_ictal_tolerance)});

    auto matches = [&](const Interval& a, const Interval& b) {
        double ov = overlap_length(a, b);
        return params.min_overlap > 0 ? ov >= params.min_overlap : ov > 0;
    };

    ScoreCounts c;
    c.kind = CountKind::event;
    c.ref_true = static_cast<std::int64_t>(ref_iv.size());
    c.total_duration_seconds = ref.recording_duration;
    for (const Interval& r : extended)
        for (const Interval& h : hyp_iv)
            if (matches(r, h)) { ++c.tp; break; }
    for (const Interval& h : hyp_iv) {
        bool hit = false;
        for (const Interval& r : extended)
            if (matches(r, h)) { hit = true; break; }
        if (!hit) ++c.fp;
    }
    return c;
}

// Undefined ratios stay absent; they are never coerced to 0 or 1.
inline Metrics compute_metrics(const ScoreCounts& c) {
    if (c.total_duration_seconds <= 0)
        throw std::invalid_argument("totalDurationSeconds must be positive");
    Metrics m;
    if (c.ref_true > 0)
        m.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.ref_true);
    if (c.tp + c.fp > 0)
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (m.sensitivity && m.precision) {
        double s = *m.sensitivity, p = *m.precision;
        m.f1 = (s + p > 0) ? 2.0 * s * p / (s + p) : 0.0;
    }
    m.fp_per_day = static_cast<double>(c.fp) * 86400.0 / c.total_duration_seconds;
    return m;
}

struct RunScores {
    ScoreCounts sample_counts;
    ScoreCounts event_counts;
};

inline RunScores score_run(const EventList& ref, const EventList& hyp,
                           const ScoringParams& params = {}) {
    RunScores out;
    out.sample_counts = score_samples(events_to_mask(ref), events_to_mask(hyp));
    out.event_counts = score_events(ref, hyp, params);
    return out;
}

inline ScoreCounts aggregate_counts(const std::vector<ScoreCounts>& per_run) {
    ScoreCounts total;
    bool first = true;
    for (const ScoreCounts& c : per_run) {
        if (first) {
            total.kind = c.kind;
            first = false;
        } else if (c.kind != total.kind) {
            throw std::invalid_argument("cannot aggregate sample and event counts");
        }
        total.tp += c.tp;
        total.fp += c.fp;
        total.ref_true += c.ref_true;
        total.total_duration_seconds += c.total_duration_seconds;
    }
    return total;
}

} // namespace szval
