#pragma once

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "szval/annotations.hpp"
#include "szval/baseline.hpp"
#include "szval/bids.hpp"
#include "szval/cv.hpp"
#include "szval/digest.hpp"
#include "szval/edf.hpp"
#include "szval/reporting.hpp"
#include "szval/scoring.hpp"
#include "szval/standardize.hpp"

namespace szval {

class pipeline_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw pipeline_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const fs::path& path, const std::string& content) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pipeline_error("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// Parse an annotation file, tolerating a header-only hypothesis file by
// falling back to the supplied recording metadata.
inline EventList parse_events_or_empty(const std::string& text, const DateTime& dt,
                                       double duration) {
    std::istringstream in(text);
    std::string line;
    bool has_data = false;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) { first = false; continue; }
        if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
            has_data = true;
            break;
        }
    }
    if (!has_data) {
        EventList empty;
        empty.date_time = dt;
        empty.recording_duration = duration;
        return empty;
    }
    return parse_annotation_tsv(text);
}

// index-stealing parallel loop; body must handle its own locking
inline void parallel_for(std::size_t count, int jobs,
                         const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
            body(i);
    };
    std::vector<std::thread> threads;
    int n = std::min<int>(jobs, static_cast<int>(count));
    for (int t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
}

} // namespace detail

inline json scoring_params_to_json(const ScoringParams& p) {
    return json{{"preIctalTolerance", p.pre_ictal_tolerance},
                {"postIctalTolerance", p.post_ictal_tolerance},
                {"mergeGap", p.merge_gap},
                {"maxEventDuration", p.max_event_duration},
                {"minOverlap", p.min_overlap}};
}

inline ScoringParams scoring_params_from_json(const json& j) {
    ScoringParams p;
    p.pre_ictal_tolerance = j.value("preIctalTolerance", p.pre_ictal_tolerance);
    p.post_ictal_tolerance = j.value("postIctalTolerance", p.post_ictal_tolerance);
    p.merge_gap = j.value("mergeGap", p.merge_gap);
    p.max_event_duration = j.value("maxEventDuration", p.max_event_duration);
    p.min_overlap = j.value("minOverlap", p.min_overlap);
    return p;
}

// ---- convert ----

enum class SourceFormat { generic, chbmit, tuh, siena, seizeit };

inline SourceFormat parse_source_format(const std::string& name) {
    if (name == "generic") return SourceFormat::generic;
    if (name == "chbmit") return SourceFormat::chbmit;
    if (name == "tuh") return SourceFormat::tuh;
    if (name == "siena") return SourceFormat::siena;
    if (name == "seizeit") return SourceFormat::seizeit;
    throw pipeline_error("unknown source format '" + name +
                         "'; expected chbmit|tuh|siena|seizeit|generic");
}

struct ConvertOptions {
    SourceFormat format = SourceFormat::generic;
    fs::path source_root;
    fs::path dest_root;
    std::string task = kDefaultTask;
    bool zero_fill_missing = false; // always on for TUH
    bool allow_low_rate = false;
    int jobs = 1;
};

struct FileAction {
    std::string source;   // relative to source root
    std::string dest;     // relative to dest root
    std::string action;   // converted | bipolar-passthrough | skipped-unchanged
    std::vector<std::string> warnings;
    std::string source_checksum;
    std::string dest_checksum;
};

struct ConversionReport {
    std::vector<FileAction> files;
    std::vector<std::string> errors;
};

inline json to_json(const ConversionReport& report) {
    json files = json::array();
    for (const FileAction& f : report.files)
        files.push_back(json{{"source", f.source},
                             {"dest", f.dest},
                             {"action", f.action},
                             {"warnings", f.warnings},
                             {"sourceChecksum", f.source_checksum},
                             {"destChecksum", f.dest_checksum}});
    return json{{"schemaVersion", kReportSchemaVersion},
                {"files", files},
                {"errors", report.errors}};
}

namespace detail {

inline std::string sanitize_id(const std::string& raw) {
    std::string out;
    for (char c : raw)
        if (std::isalnum(static_cast<unsigned char>(c))) out += c;
    return out.empty() ? "01" : out;
}

struct SourceRun {
    fs::path edf;
    fs::path events; // empty if absent
    RunId id;
};

// Discover source EDFs and assign BIDS identities. Files already carrying a
// BIDS name keep it; otherwise the subject comes from the parent directory
// and runs are numbered in sorted order.
inline std::vector<SourceRun> discover_source_runs(const fs::path& root,
                                                   const std::string& task) {
    std::vector<fs::path> edfs;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file() && entry.path().extension() == ".edf")
            edfs.push_back(entry.path());
    std::sort(edfs.begin(), edfs.end());

    std::map<std::string, int> run_counter;
    std::vector<SourceRun> runs;
    for (const fs::path& edf : edfs) {
        SourceRun run;
        run.edf = edf;
        std::string stem = edf.stem().string();
        if (stem.ends_with("_eeg")) stem.resize(stem.size() - 4);
        if (auto id = parse_bids_stem(stem)) {
            run.id = *id;
            run.id.task = task;
        } else {
            std::string subject =
                edf.parent_path() == root ? "01" : sanitize_id(edf.parent_path().filename().string());
            char buf[8];
            std::snprintf(buf, sizeof(buf), "%02d", run_counter[subject]++);
            run.id = {subject, "01", task, buf};
        }
        for (const fs::path& candidate :
             {edf.parent_path() / (stem + "_events.tsv"),
              edf.parent_path() / (edf.stem().string() + ".tsv")}) {
            if (fs::exists(candidate)) {
                run.events = candidate;
                break;
            }
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

} // namespace detail

inline ConversionReport convert_dataset(const ConvertOptions& opts) {
    if (!fs::exists(opts.source_root))
        throw pipeline_error("source root does not exist: " + opts.source_root.string());
    fs::create_directories(opts.dest_root);

    // resume: skip files whose recorded source checksum still matches
    std::map<std::string, FileAction> previous;
    fs::path report_path = opts.dest_root / "conversion_report.json";
    if (fs::exists(report_path)) {
        try {
            json j = json::parse(detail::read_text_file(report_path));
            for (const json& f : j.at("files")) {
                FileAction a{f.at("source"), f.at("dest"), f.at("action"),
                             f.at("warnings").get<std::vector<std::string>>(),
                             f.at("sourceChecksum"), f.at("destChecksum")};
                previous[a.source] = std::move(a);
            }
        } catch (const std::exception&) {
            // unreadable report: reconvert everything
        }
    }

    auto runs = detail::discover_source_runs(opts.source_root, opts.task);
    bool zero_fill = opts.zero_fill_missing || opts.format == SourceFormat::tuh;
    bool bipolar = opts.format == SourceFormat::chbmit;

    ConversionReport report;
    report.files.resize(runs.size());
    std::vector<std::string> file_errors(runs.size());

    detail::parallel_for(runs.size(), opts.jobs, [&](std::size_t i) {
        const detail::SourceRun& run = runs[i];
        FileAction action;
        action.source = fs::relative(run.edf, opts.source_root).string();
        try {
            std::string source_bytes = detail::read_text_file(run.edf);
            action.source_checksum = fnv1a64_hex(source_bytes);

            fs::path eeg_dir = opts.dest_root / ("sub-" + run.id.subject) /
                               ("ses-" + run.id.session) / "eeg";
            fs::path dest_edf = eeg_dir / (run.id.stem() + "_eeg.edf");
            action.dest = fs::relative(dest_edf, opts.dest_root).string();

            auto prev = previous.find(action.source);
            if (prev != previous.end() &&
                prev->second.source_checksum == action.source_checksum &&
                fs::exists(dest_edf)) {
                action = prev->second;
                action.action = "skipped-unchanged";
                report.files[i] = std::move(action);
                return;
            }

            Recording rec = read_edf(source_bytes);
            Recording converted;
            std::string montage;
            if (bipolar) {
                montage = "bipolar";
                action.action = "bipolar-passthrough";
                converted = rec.sampling_rate == kCanonicalRate
                                ? rec
                                : resample(rec, kCanonicalRate,
                                           {opts.allow_low_rate});
            } else {
                montage = "unipolar-avg";
                action.action = "converted";
                CanonicalizeOptions copts;
                copts.zero_fill_missing = zero_fill;
                copts.resample.allow_upsample_from_below_256 = opts.allow_low_rate;
                CanonicalRecording canon = canonicalize(rec, copts);
                for (const std::string& name : canon.zero_filled)
                    action.warnings.push_back("zero-filled missing electrode " + name);
                converted = std::move(canon.recording);
            }

            EventList events;
            if (!run.events.empty()) {
                events = detail::parse_events_or_empty(
                    detail::read_text_file(run.events), converted.start_date_time,
                    converted.duration_seconds);
                if (std::abs(events.recording_duration - converted.duration_seconds) > 1.0)
                    action.warnings.push_back(
                        "annotation recordingDuration differs from EDF duration by more "
                        "than 1 s");
            } else {
                action.warnings.push_back("no annotation file; writing bckg only");
                events.date_time = converted.start_date_time;
                events.recording_duration = converted.duration_seconds;
            }

            std::string edf_bytes = write_edf(converted);
            detail::write_text_file(dest_edf, edf_bytes);
            action.dest_checksum = fnv1a64_hex(edf_bytes);

            detail::write_text_file(eeg_dir / (run.id.stem() + "_events.tsv"),
                                    serialize_annotation_tsv(events, {true}));
            json sidecar{{"TaskName", run.id.task},
                         {"SamplingFrequency", converted.sampling_rate},
                         {"EEGChannelCount", converted.channels.size()},
                         {"Montage", montage},
                         {"PowerLineFrequency", nullptr}};
            detail::write_text_file(eeg_dir / (run.id.stem() + "_eeg.json"),
                                    sidecar.dump(2) + "\n");
        } catch (const std::exception& ex) {
            file_errors[i] = action.source + ": " + ex.what();
        }
        report.files[i] = std::move(action);
    });

    for (std::size_t i = 0; i < runs.size(); ++i)
        if (!file_errors[i].empty()) report.errors.push_back(file_errors[i]);
    // drop entries that failed before producing output
    std::vector<FileAction> kept;
    for (FileAction& a : report.files)
        if (!a.action.empty()) kept.push_back(std::move(a));
    report.files = std::move(kept);

    json desc{{"Name", "szval converted dataset"},
              {"BIDSVersion", "1.8.0"},
              {"DatasetType", "raw"}};
    detail::write_text_file(opts.dest_root / "dataset_description.json",
                            desc.dump(2) + "\n");
    detail::write_text_file(report_path, to_json(report).dump(2) + "\n");
    return report;
}

// ---- detect-baseline ----

struct DetectOptions {
    fs::path dataset_root;
    std::string derivative = kDefaultDerivative;
    BaselineParams params;
    int jobs = 1;
};

struct DetectReport {
    int runs_processed = 0;
    std::vector<std::string> errors;
};

inline DetectReport detect_baseline_dataset(const DetectOptions& opts) {
    DatasetIndex index = index_dataset(opts.dataset_root);
    DetectReport report;
    std::mutex mu;
    detail::parallel_for(index.runs.size(), opts.jobs, [&](std::size_t i) {
        const RunEntry& run = index.runs[i];
        try {
            Recording rec = read_edf_file(run.eeg_path.string());
            EventList hyp = detect_baseline(rec, opts.params);
            if (!run.events_path.empty()) {
                // score pairing requires exact recordingDuration agreement
                EventList ref = detail::parse_events_or_empty(
                    detail::read_text_file(run.events_path), rec.start_date_time,
                    rec.duration_seconds);
                hyp.recording_duration = ref.recording_duration;
                hyp.date_time = ref.date_time;
                for (Event& e : hyp.events) {
                    e.recording_duration = ref.recording_duration;
                    e.date_time = ref.date_time;
                    e.duration = std::min(e.duration, e.recording_duration - e.onset);
                }
            }
            fs::path out = derivative_path_for(opts.dataset_root, run.id, opts.derivative);
            detail::write_text_file(out, serialize_annotation_tsv(hyp, {true}));
            std::lock_guard<std::mutex> lock(mu);
            ++report.runs_processed;
        } catch (const std::exception& ex) {
            std::lock_guard<std::mutex> lock(mu);
            report.errors.push_back(run.eeg_path.string() + ": " + ex.what());
        }
    });
    return report;
}

// ---- score ----

struct ScoreOptions {
    fs::path dataset_root;
    std::string derivative = kDefaultDerivative;
    std::string dataset_name = "dataset";
    Scenario scenario = Scenario::subject_independent_single;
    std::optional<std::string> training_dataset;
    ScoringParams params;
    std::string type_filter = "sz"; // score all seizure types by default
};

// Pair reference and hypothesis annotations run by run, score, and
// aggregate per subject. Runs without a hypothesis file are scored against
// an empty hypothesis rather than skipped.
inline DatasetResult score_dataset(const ScoreOptions& opts) {
    DatasetIndex index = index_dataset(opts.dataset_root);
    PairingResult pairing = pair_hypothesis_with_reference(index, opts.derivative);
    if (pairing.pairs.empty() && pairing.missing_hypothesis.empty())
        throw pipeline_error("no pairable runs found under " +
                             opts.dataset_root.string());

    std::map<std::string, std::vector<RunScores>> per_subject;
    auto score_one = [&](const RunId& id, const fs::path& ref_path,
                         const fs::path& hyp_path) {
        EventList ref = parse_annotation_tsv(detail::read_text_file(ref_path));
        ref = events_of_type(ref, opts.type_filter);
        EventList hyp;
        if (hyp_path.empty()) {
            hyp.date_time = ref.date_time;
            hyp.recording_duration = ref.recording_duration;
        } else {
            hyp = detail::parse_events_or_empty(detail::read_text_file(hyp_path),
                                                ref.date_time, ref.recording_duration);
            hyp = events_of_type(hyp, opts.type_filter);
        }
        per_subject[id.subject].push_back(score_run(ref, hyp, opts.params));
    };
    for (const ScoringPair& pair : pairing.pairs)
        score_one(pair.id, pair.reference_events, pair.hypothesis_events);
    for (const RunEntry& run : pairing.missing_hypothesis)
        score_one(run.id, run.events_path, {});

    std::vector<SubjectResult> subjects;
    for (const auto& [subject, runs] : per_subject)
        subjects.push_back(summarize_subject(subject, runs));
    return summarize_dataset(opts.dataset_name, std::move(subjects), opts.scenario,
                             opts.training_dataset);
}

inline json score_dataset_document(const ScoreOptions& opts) {
    json doc = to_json(score_dataset(opts));
    doc["scoringParams"] = scoring_params_to_json(opts.params);
    return doc;
}

// ---- plan ----

struct PlanOptions {
    fs::path dataset_root;
    std::string method = "loo"; // tscv | loo | kfold | fixed
    TscvParams tscv;
    int k = 5;
    std::uint64_t seed = 0;
    std::vector<std::string> train_subjects; // fixed split
    std::vector<std::string> test_subjects;
    int min_seizures_personalized = 3;
    double min_hours_personalized = 1.5;
};

struct PlanOutcome {
    FoldPlan plan;
    PlanKind kind = PlanKind::subject_independent;
    std::vector<std::string> exclusions; // personalized-ineligible subjects
    std::vector<PlanViolation> violations;
};

// Build per-subject timelines from the reference annotation files.
inline std::map<std::string, std::vector<TimelineSegment>> dataset_timelines(
    const DatasetIndex& index) {
    std::map<std::string, std::vector<TimelineSegment>> timelines;
    for (const RunEntry& run : index.runs) {
        if (run.events_path.empty()) continue;
        EventList events = parse_annotation_tsv(detail::read_text_file(run.events_path));
        TimelineSegment seg;
        seg.subject = run.id.subject;
        seg.run = run.id.stem();
        seg.start_date_time = events.date_time;
        seg.duration_seconds = events.recording_duration;
        for (const Event& e : seizure_events(events).events)
            seg.seizure_onsets.push_back(e.onset);
        timelines[run.id.subject].push_back(std::move(seg));
    }
    return timelines;
}

inline PlanOutcome plan_dataset(const PlanOptions& opts) {
    DatasetIndex index = index_dataset(opts.dataset_root);
    PlanOutcome out;
    if (opts.method == "tscv") {
        out.kind = PlanKind::personalized;
        for (auto& [subject, timeline] : dataset_timelines(index)) {
            std::string reason = personalized_exclusion_reason(
                timeline, opts.min_seizures_personalized, opts.min_hours_personalized);
            if (!reason.empty()) {
                out.exclusions.push_back(subject + ": " + reason);
                continue;
            }
            try {
                FoldPlan sub_plan = plan_tscv(timeline, opts.tscv);
                for (Fold& f : sub_plan.folds) out.plan.folds.push_back(std::move(f));
                for (std::string& w : sub_plan.warnings)
                    out.plan.warnings.push_back(std::move(w));
            } catch (const cv_error& ex) {
                out.exclusions.push_back(subject + ": " + ex.what());
            }
        }
        if (out.plan.folds.empty())
            throw pipeline_error("no subject eligible for a personalized plan");
    } else if (opts.method == "loo") {
        out.plan = plan_loo(index.subjects);
    } else if (opts.method == "kfold") {
        out.plan = plan_kfold(index.subjects, opts.k, opts.seed);
    } else if (opts.method == "fixed") {
        out.plan = plan_fixed(opts.train_subjects, opts.test_subjects);
    } else {
        throw pipeline_error("unknown plan method '" + opts.method + "'");
    }
    out.violations = verify_plan(out.plan, out.kind);
    return out;
}

} // namespace szval
