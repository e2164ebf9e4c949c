#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "szval/datetime.hpp"

namespace szval {

class cv_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One contiguous recording on a subject's timeline. Seizure onsets are in
// seconds from the segment start.
struct TimelineSegment {
    std::string subject;
    std::string run;
    DateTime start_date_time;
    double duration_seconds = 0.0;
    std::vector<double> seizure_onsets;

    int seizure_count() const { return static_cast<int>(seizure_onsets.size()); }
};

// A slice of data assigned to a fold. Subject-level plans (LOO, k-fold,
// fixed split) leave run empty and length 0 meaning "all data".
struct PlanRegion {
    std::string subject;
    std::string run;
    double offset_seconds = 0.0;
    double length_seconds = 0.0;
    double abs_start = 0.0; // epoch seconds, used for chronology checks

    double abs_end() const { return abs_start + length_seconds; }
    bool whole_subject() const { return run.empty(); }
    friend bool operator==(const PlanRegion&, const PlanRegion&) = default;
};

struct Fold {
    std::vector<PlanRegion> train;
    std::vector<PlanRegion> test;
    friend bool operator==(const Fold&, const Fold&) = default;
};

struct FoldPlan {
    std::vector<Fold> folds;
    std::vector<std::string> warnings;
    friend bool operator==(const FoldPlan& a, const FoldPlan& b) {
        return a.folds == b.folds;
    }
};

enum class TscvMode { variable, fixed };
enum class PlanKind { personalized, subject_independent };

struct TscvParams {
    TscvMode mode = TscvMode::variable;
    double initial_train_hours = 5.0;
    int min_initial_seizures = 1;
    double step_hours = 1.0;
};

namespace detail {

// Intersect a wall-clock window with the segments, emitting run slices.
inline std::vector<PlanRegion> slice_segments(
    const std::vector<TimelineSegment>& segments, double t0,
    double win_start, double win_end) {
    std::vector<PlanRegion> out;
    for (const TimelineSegment& seg : segments) {
        double s0 = static_cast<double>(to_epoch_seconds(seg.start_date_time)) - t0;
        double s1 = s0 + seg.duration_seconds;
        double a = std::max(win_start, s0);
        double b = std::min(win_end, s1);
        if (b <= a) continue;
        out.push_back({seg.subject, seg.run, a - s0, b - a, t0 + a});
    }
    return out;
}

} // namespace detail

// Time-series cross-validation for one subject. Hours are counted on the
// wall clock from the first sample; fold boundaries snap to whole steps.
// The initial training window covers at least initial_train_hours and is
// extended to the next step boundary past the required seizure if needed.
inline FoldPlan plan_tscv(std::vector<TimelineSegment> timeline,
                          const TscvParams& params = {}) {
    if (timeline.empty()) throw cv_error("empty timeline");
    if (params.step_hours <= 0 || params.initial_train_hours <= 0)
        throw cv_error("non-positive TSCV window parameters");
    std::sort(timeline.begin(), timeline.end(),
              [](const TimelineSegment& a, const TimelineSegment& b) {
                  return to_epoch_seconds(a.start_date_time) <
                         to_epoch_seconds(b.start_date_time);
              });
    for (const TimelineSegment& seg : timeline) {
        if (seg.duration_seconds <= 0)
            throw cv_error("segment with non-positive duration: " + seg.run);
        if (seg.subject != timeline.front().subject)
            throw cv_error("plan_tscv expects a single subject's timeline");
    }

    const double t0 = static_cast<double>(to_epoch_seconds(timeline.front().start_date_time));
    double end = 0.0;
    std::vector<double> seizures; // wall-clock offsets from t0
    for (const TimelineSegment& seg : timeline) {
        double s0 = static_cast<double>(to_epoch_seconds(seg.start_date_time)) - t0;
        end = std::max(end, s0 + seg.duration_seconds);
        for (double onset : seg.seizure_onsets) seizures.push_back(s0 + onset);
    }
    std::sort(seizures.begin(), seizures.end());

    if (static_cast<int>(seizures.size()) < params.min_initial_seizures)
        throw cv_error("subject '" + timeline.front().subject + "' has " +
                       std::to_string(seizures.size()) +
                       " seizures; personalized TSCV requires at least " +
                       std::to_string(params.min_initial_seizures));

    const double step = params.step_hours * 3600.0;
    const double init = params.initial_train_hours * 3600.0;
    if (end <= init + step)
        throw cv_error("timeline too short for TSCV: " + std::to_string(end / 3600.0) +
                       " h available, need more than " +
                       std::to_string(params.initial_train_hours + params.step_hours) + " h");

    // extend the initial window to the step boundary after the required seizure
    double train_end = init;
    double required = seizures[static_cast<std::size_t>(params.min_initial_seizures) - 1];
    if (required >= train_end)
        train_end = (std::floor(required / step) + 1.0) * step;
    if (train_end >= end)
        throw cv_error("no test data remains after the initial training window");

    FoldPlan plan;
    if (end - 0.0 > 7.0 * 86400.0)
        plan.warnings.push_back("timeline of subject '" + timeline.front().subject +
                                "' spans more than 7 days of wall-clock time");

    const double train_len = train_end;
    for (double test_start = train_end; test_start < end; test_start += step) {
        double test_end = std::min(test_start + step, end);
        Fold fold;
        double train_start =
            (params.mode == TscvMode::variable) ? 0.0 : test_start - train_len;
        fold.train = detail::slice_segments(timeline, t0, train_start, test_start);
        fold.test = detail::slice_segments(timeline, t0, test_start, test_end);
        if (!fold.test.empty()) plan.folds.push_back(std::move(fold));
    }
    return plan;
}

// Eligibility rule for personalized plans; returns an exclusion
// reason or empty string when the subject qualifies.
inline std::string personalized_exclusion_reason(
    const std::vector<TimelineSegment>& timeline,
    int min_seizures = 3, double min_hours = 1.5) {
    int seizures = 0;
    double hours = 0.0;
    for (const TimelineSegment& seg : timeline) {
        seizures += seg.seizure_count();
        hours += seg.duration_seconds / 3600.0;
    }
    if (seizures < min_seizures)
        return "only " + std::to_string(seizures) + " seizures, need at least " +
               std::to_string(min_seizures);
    if (hours < min_hours)
        return "only " + std::to_string(hours) + " h of data, need at least " +
               std::to_string(min_hours) + " h";
    return {};
}

inline PlanRegion whole_subject_region(const std::string& subject) {
    return {subject, "", 0.0, 0.0, 0.0};
}

inline FoldPlan plan_loo(std::vector<std::string> subjects) {
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
    if (subjects.size() < 2)
        throw cv_error("leave-one-out requires at least 2 subjects");
    FoldPlan plan;
    for (const std::string& test_subject : subjects) {
        Fold fold;
        fold.test.push_back(whole_subject_region(test_subject));
        for (const std::string& s : subjects)
            if (s != test_subject) fold.train.push_back(whole_subject_region(s));
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

namespace detail {

// Hand-rolled Fisher-Yates: std::shuffle's draw sequence is
// implementation-defined, and plans must be reproducible byte-for-byte.
inline void deterministic_shuffle(std::vector<std::string>& items, std::uint64_t seed) {
    std::uint64_t state = seed ^ 0x9e3779b97f4a7c15ull;
    if (state == 0) state = 1;
    auto next = [&]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    };
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[next() % i]);
}

} // namespace detail

inline FoldPlan plan_kfold(std::vector<std::string> subjects, int k, std::uint64_t seed) {
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
    if (k < 2 || k > static_cast<int>(subjects.size()))
        throw cv_error("k must satisfy 2 <= k <= subject count, got k=" +
                       std::to_string(k) + " for " + std::to_string(subjects.size()) +
                       " subjects");
    detail::deterministic_shuffle(subjects, seed);

    // near-equal partition: the first (n mod k) test groups take one extra
    std::size_t n = subjects.size();
    std::size_t base = n / static_cast<std::size_t>(k);
    std::size_t extra = n % static_cast<std::size_t>(k);
    FoldPlan plan;
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        Fold fold;
        std::set<std::string> test_set(subjects.begin() + pos,
                                       subjects.begin() + pos + size);
        pos += size;
        for (const std::string& s : test_set)
            fold.test.push_back(whole_subject_region(s));
        std::sort(fold.test.begin(), fold.test.end(),
                  [](const PlanRegion& a, const PlanRegion& b) {
                      return a.subject < b.subject;
                  });
        std::vector<std::string> train;
        for (const std::string& s : subjects)
            if (!test_set.count(s)) train.push_back(s);
        std::sort(train.begin(), train.end());
        for (const std::string& s : train) fold.train.push_back(whole_subject_region(s));
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

inline FoldPlan plan_fixed(const std::vector<std::string>& train_subjects,
                           const std::vector<std::string>& test_subjects) {
    if (test_subjects.empty()) throw cv_error("fixed split has an empty test set");
    std::set<std::string> train(train_subjects.begin(), train_subjects.end());
    for (const std::string& s : test_subjects)
        if (train.count(s))
            throw cv_error("subject '" + s + "' appears in both train and test sets");
    FoldPlan plan;
    Fold fold;
    for (const std::string& s : train) fold.train.push_back(whole_subject_region(s));
    for (const std::string& s : std::set<std::string>(test_subjects.begin(),
                                                      test_subjects.end()))
        fold.test.push_back(whole_subject_region(s));
    plan.folds.push_back(std::move(fold));
    return plan;
}

struct PlanViolation {
    int fold_index;
    std::string description;
};

// Check the structural invariants of a plan. Violations are report
// content, not exceptions.
inline std::vector<PlanViolation> verify_plan(const FoldPlan& plan, PlanKind kind) {
    std::vector<PlanViolation> violations;
    std::map<std::string, int> test_memberships;
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const Fold& fold = plan.folds[f];
        int fi = static_cast<int>(f);

        if (kind == PlanKind::personalized) {
            double max_train_end = -1e300, min_test_start = 1e300;
            for (const PlanRegion& r : fold.train)
                max_train_end = std::max(max_train_end, r.abs_end());
            for (const PlanRegion& r : fold.test)
                min_test_start = std::min(min_test_start, r.abs_start);
            if (!fold.train.empty() && !fold.test.empty() &&
                max_train_end > min_test_start)
                violations.push_back({fi, "chronology: train data ends after test starts"});
        } else {
            std::set<std::string> train_subjects, test_subjects;
            for (const PlanRegion& r : fold.train) train_subjects.insert(r.subject);
            for (const PlanRegion& r : fold.test) {
                test_subjects.insert(r.subject);
                ++test_memberships[r.subject];
            }
            for (const std::string& s : test_subjects)
                if (train_subjects.count(s))
                    violations.push_back(
                        {fi, "independence: subject '" + s + "' in both train and test"});
        }

        // identical data region on both sides of the same fold
        for (const PlanRegion& a : fold.train)
            for (const PlanRegion& b : fold.test) {
                if (a.subject != b.subject || a.run != b.run) continue;
                if (a.whole_subject() ||
                    (a.offset_seconds < b.offset_seconds + b.length_seconds &&
                     b.offset_seconds < a.offset_seconds + a.length_seconds))
                    violations.push_back(
                        {fi, "overlap: region of run '" + a.run +
                                 "' appears in both train and test"});
            }
    }
    if (kind == PlanKind::subject_independent && plan.folds.size() > 1)
        for (const auto& [subject, count] : test_memberships)
            if (count != 1)
                violations.push_back({-1, "subject '" + subject + "' appears in " +
                                              std::to_string(count) + " test sets"});
    return violations;
}

namespace detail {

inline std::string format_plan_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

} // namespace detail

// Manifest format: TSV with one region per line.
inline std::string serialize_fold_plan(const FoldPlan& plan) {
    std::string out = "fold\trole\tsubject\trun\toffset\tlength\n";
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        auto emit = [&](const char* role, const PlanRegion& r) {
            out += std::to_string(f);
            out += '\t';
            out += role;
            out += '\t';
            out += r.subject;
            out += '\t';
            out += r.run.empty() ? "all" : r.run;
            out += '\t';
            out += detail::format_plan_number(r.offset_seconds);
            out += '\t';
            out += detail::format_plan_number(r.length_seconds);
            out += '\n';
        };
        for (const PlanRegion& r : plan.folds[f].train) emit("train", r);
        for (const PlanRegion& r : plan.folds[f].test) emit("test", r);
    }
    return out;
}

inline FoldPlan parse_fold_plan(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) ||
        line != "fold\trole\tsubject\trun\toffset\tlength")
        throw cv_error("malformed fold-plan manifest header");
    FoldPlan plan;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string fold_s, role, subject, run, offset_s, length_s;
        if (!std::getline(ls, fold_s, '\t') || !std::getline(ls, role, '\t') ||
            !std::getline(ls, subject, '\t') || !std::getline(ls, run, '\t') ||
            !std::getline(ls, offset_s, '\t') || !std::getline(ls, length_s))
            throw cv_error("malformed fold-plan manifest line: " + line);
        std::size_t fold = std::stoul(fold_s);
        while (plan.folds.size() <= fold) plan.folds.emplace_back();
        PlanRegion r{subject, run == "all" ? "" : run, std::stod(offset_s),
                     std::stod(length_s), 0.0};
        if (role == "train")
            plan.folds[fold].train.push_back(std::move(r));
        else if (role == "test")
            plan.folds[fold].test.push_back(std::move(r));
        else
            throw cv_error("unknown role '" + role + "' in fold-plan manifest");
    }
    return plan;
}

} // namespace szval
