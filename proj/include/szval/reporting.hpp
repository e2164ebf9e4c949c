#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "szval/scoring.hpp"

namespace szval {

class reporting_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

inline constexpr const char* kReportSchemaVersion = "1";

struct SubjectResult {
    std::string subject;
    ScoreCounts sample_counts;
    ScoreCounts event_counts;
    Metrics sample_metrics;
    Metrics event_metrics;
};

// Per-subject counts are summed over runs first; metrics always derive
// from the aggregated counts, never from averaging per-run metrics.
inline SubjectResult summarize_subject(const std::string& subject,
                                       const std::vector<RunScores>& runs) {
    if (runs.empty())
        throw reporting_error("cannot summarize subject '" + subject + "' with no runs");
    std::vector<ScoreCounts> sample, event;
    for (const RunScores& r : runs) {
        sample.push_back(r.sample_counts);
        event.push_back(r.event_counts);
    }
    SubjectResult out;
    out.subject = subject;
    out.sample_counts = aggregate_counts(sample);
    out.event_counts = aggregate_counts(event);
    out.sample_metrics = compute_metrics(out.sample_counts);
    out.event_metrics = compute_metrics(out.event_counts);
    return out;
}

enum class Scenario { personalized, subject_independent_single, subject_independent_cross };

inline const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::personalized: return "personalized";
        case Scenario::subject_independent_single: return "subjectIndependent-single";
        case Scenario::subject_independent_cross: return "subjectIndependent-cross";
    }
    return "?";
}

inline Scenario parse_scenario(const std::string& name) {
    if (name == "personalized") return Scenario::personalized;
    if (name == "subjectIndependent-single") return Scenario::subject_independent_single;
    if (name == "subjectIndependent-cross") return Scenario::subject_independent_cross;
    throw reporting_error("unknown scenario '" + name + "'");
}

// Unweighted mean over subjects with a defined value; undefined values are
// skipped and counted, never coerced.
struct MeanMetric {
    std::optional<double> mean;
    std::optional<double> duration_weighted_mean; // supplementary
    int skipped = 0;
};

struct OverallMetrics {
    MeanMetric sensitivity;
    MeanMetric precision;
    MeanMetric f1;
    MeanMetric fp_per_day;
};

struct DatasetResult {
    std::string dataset;
    Scenario scenario = Scenario::subject_independent_single;
    std::optional<std::string> training_dataset;
    std::vector<SubjectResult> per_subject;
    OverallMetrics overall_sample;
    OverallMetrics overall_event;
};

namespace detail {

template <class Getter>
inline MeanMetric mean_over_subjects(const std::vector<SubjectResult>& subjects,
                                     Getter metric, Getter duration) {
    MeanMetric out;
    double sum = 0.0, wsum = 0.0, wtotal = 0.0;
    int n = 0;
    for (const SubjectResult& s : subjects) {
        std::optional<double> v = metric(s);
        if (!v) {
            ++out.skipped;
            continue;
        }
        sum += *v;
        ++n;
        double w = *duration(s);
        wsum += *v * w;
        wtotal += w;
    }
    if (n > 0) out.mean = sum / n;
    if (wtotal > 0) out.duration_weighted_mean = wsum / wtotal;
    return out;
}

inline OverallMetrics overall_from(const std::vector<SubjectResult>& subjects,
                                   bool event_based) {
    auto pick = [event_based](const SubjectResult& s) -> const Metrics& {
        return event_based ? s.event_metrics : s.sample_metrics;
    };
    auto dur = [event_based](const SubjectResult& s) -> std::optional<double> {
        return event_based ? s.event_counts.total_duration_seconds
                           : s.sample_counts.total_duration_seconds;
    };
    using G = std::function<std::optional<double>(const SubjectResult&)>;
    OverallMetrics out;
    out.sensitivity = mean_over_subjects<G>(
        subjects, [&](const SubjectResult& s) { return pick(s).sensitivity; }, dur);
    out.precision = mean_over_subjects<G>(
        subjects, [&](const SubjectResult& s) { return pick(s).precision; }, dur);
    out.f1 = mean_over_subjects<G>(
        subjects, [&](const SubjectResult& s) { return pick(s).f1; }, dur);
    out.fp_per_day = mean_over_subjects<G>(
        subjects,
        [&](const SubjectResult& s) -> std::optional<double> { return pick(s).fp_per_day; },
        dur);
    return out;
}

} // namespace detail

inline DatasetResult summarize_dataset(
    const std::string& dataset, std::vector<SubjectResult> subjects, Scenario scenario,
    std::optional<std::string> training_dataset = std::nullopt) {
    if (subjects.empty())
        throw reporting_error("cannot summarize dataset '" + dataset +
                              "' with no subjects");
    std::sort(subjects.begin(), subjects.end(),
              [](const SubjectResult& a, const SubjectResult& b) {
                  return a.subject < b.subject;
              });
    DatasetResult out;
    out.dataset = dataset;
    out.scenario = scenario;
    out.training_dataset = std::move(training_dataset);
    out.overall_sample = detail::overall_from(subjects, false);
    out.overall_event = detail::overall_from(subjects, true);
    out.per_subject = std::move(subjects);
    return out;
}

// ---- JSON (de)serialization; full precision, no render-time rounding ----

inline json to_json(const ScoreCounts& c) {
    return json{{"kind", c.kind == CountKind::sample ? "sample" : "event"},
                {"tp", c.tp},
                {"fp", c.fp},
                {"refTrue", c.ref_true},
                {"fn", c.fn()},
                {"totalDurationSeconds", c.total_duration_seconds}};
}

inline ScoreCounts counts_from_json(const json& j) {
    ScoreCounts c;
    c.kind = j.at("kind") == "sample" ? CountKind::sample : CountKind::event;
    c.tp = j.at("tp");
    c.fp = j.at("fp");
    c.ref_true = j.at("refTrue");
    c.total_duration_seconds = j.at("totalDurationSeconds");
    return c;
}

inline json to_json(const Metrics& m) {
    auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    return json{{"sensitivity", opt(m.sensitivity)},
                {"precision", opt(m.precision)},
                {"f1", opt(m.f1)},
                {"fpPerDay", m.fp_per_day}};
}

inline json to_json(const MeanMetric& m) {
    json j;
    j["mean"] = m.mean ? json(*m.mean) : json(nullptr);
    j["durationWeightedMean"] =
        m.duration_weighted_mean ? json(*m.duration_weighted_mean) : json(nullptr);
    j["skippedSubjects"] = m.skipped;
    return j;
}

inline json to_json(const OverallMetrics& m) {
    return json{{"sensitivity", to_json(m.sensitivity)},
                {"precision", to_json(m.precision)},
                {"f1", to_json(m.f1)},
                {"fpPerDay", to_json(m.fp_per_day)}};
}

inline json to_json(const DatasetResult& r) {
    json subjects = json::array();
    for (const SubjectResult& s : r.per_subject) {
        subjects.push_back(json{{"subject", s.subject},
                                {"sampleCounts", to_json(s.sample_counts)},
                                {"eventCounts", to_json(s.event_counts)},
                                {"sampleMetrics", to_json(s.sample_metrics)},
                                {"eventMetrics", to_json(s.event_metrics)}});
    }
    json j{{"schemaVersion", kReportSchemaVersion},
           {"dataset", r.dataset},
           {"scenario", scenario_name(r.scenario)},
           {"perSubject", subjects},
           {"overallSample", to_json(r.overall_sample)},
           {"overallEvent", to_json(r.overall_event)}};
    if (r.training_dataset) j["trainingDataset"] = *r.training_dataset;
    return j;
}

inline DatasetResult dataset_result_from_json(const json& j) {
    DatasetResult r;
    r.dataset = j.at("dataset");
    r.scenario = parse_scenario(j.at("scenario"));
    if (j.contains("trainingDataset")) r.training_dataset = j["trainingDataset"];
    for (const json& s : j.at("perSubject")) {
        SubjectResult sub;
        sub.subject = s.at("subject");
        sub.sample_counts = counts_from_json(s.at("sampleCounts"));
        sub.event_counts = counts_from_json(s.at("eventCounts"));
        sub.sample_metrics = compute_metrics(sub.sample_counts);
        sub.event_metrics = compute_metrics(sub.event_counts);
        r.per_subject.push_back(std::move(sub));
    }
    r.overall_sample = detail::overall_from(r.per_subject, false);
    r.overall_event = detail::overall_from(r.per_subject, true);
    return r;
}

// ---- Model card ----

struct ModelCard {
    std::string model_name;
    std::string developers;
    std::string institution;
    std::string contact_email;
    std::string source_link;
    std::string citation;
    std::string description;
    std::vector<DatasetResult> results;
    json scoring_params;     // parameters the results were computed with
    std::string plan_digest; // digest of the fold-plan manifest, if any
};

enum class CardFormat { structured, human_readable };

inline const std::vector<std::string>& card_datasets() {
    static const std::vector<std::string> names = {"CHB-MIT", "TUH", "Siena", "SeizeIT"};
    return names;
}

namespace detail {

// 1 decimal for percentages, 2 for FP/day; `n/a` for undefined values,
// `-` for cells that were not evaluated.
inline std::string render_pct(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", *v * 100.0);
    return buf;
}

inline std::string render_fpday(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *v);
    return buf;
}

inline const DatasetResult* find_result(const ModelCard& card, Scenario scenario,
                                        const std::string& dataset) {
    for (const DatasetResult& r : card.results)
        if (r.scenario == scenario && r.dataset == dataset) return &r;
    return nullptr;
}

inline std::string render_card_table(const ModelCard& card, Scenario scenario,
                                     const std::string& title) {
    std::string out = "### " + title + "\n\n";
    out += "| Metrics |";
    for (int pass = 0; pass < 2; ++pass)
        for (const std::string& ds : card_datasets()) out += " " + ds + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < 2 * card_datasets().size(); ++i) out += "---|";
    out += "\n";
    const char* rows[] = {"F1-score", "Sensitivity", "Precision", "FP/day"};
    for (const char* row : rows) {
        out += "| ";
        out += row;
        out += " |";
        for (int event_pass = 1; event_pass >= 0; --event_pass) {
            for (const std::string& ds : card_datasets()) {
                std::string cell = "-";
                // TUH has too little data per subject for personalized models
                bool excluded = scenario == Scenario::personalized && ds == "TUH";
                const DatasetResult* r = find_result(card, scenario, ds);
                if (r && !excluded) {
                    const OverallMetrics& m =
                        event_pass ? r->overall_event : r->overall_sample;
                    if (std::string(row) == "F1-score") cell = render_pct(m.f1.mean);
                    else if (std::string(row) == "Sensitivity")
                        cell = render_pct(m.sensitivity.mean);
                    else if (std::string(row) == "Precision")
                        cell = render_pct(m.precision.mean);
                    else cell = render_fpday(m.fp_per_day.mean);
                }
                out += " " + cell + " |";
            }
        }
        out += "\n";
    }
    out += "\n";
    return out;
}

} // namespace detail

inline std::string emit_model_card(const ModelCard& card, CardFormat format) {
    if (card.results.empty())
        throw reporting_error("model card has no result tables");

    if (format == CardFormat::structured) {
        json j{{"schemaVersion", kReportSchemaVersion},
               {"modelName", card.model_name},
               {"contact",
                json{{"developers", card.developers},
                     {"institution", card.institution},
                     {"email", card.contact_email}}},
               {"model",
                json{{"sourceLink", card.source_link},
                     {"citation", card.citation},
                     {"description", card.description}}},
               {"scoringParams", card.scoring_params.is_null() ? json(json::object())
                                                               : card.scoring_params},
               {"planDigest", card.plan_digest}};
        json results = json::array();
        for (const DatasetResult& r : card.results) results.push_back(to_json(r));
        j["results"] = results;
        return j.dump(2) + "\n";
    }

    std::string out = "## Model card: " + card.model_name + "\n\n";
    out += "**Developers:** " + card.developers + "  \n";
    out += "**Institution:** " + card.institution + "  \n";
    out += "**Contact:** " + card.contact_email + "  \n";
    out += "**Source:** " + card.source_link + "  \n";
    out += "**Citation:** " + card.citation + "  \n";
    out += "**Description:** " + card.description + "\n\n";
    out += "Columns: event-based results first, then sample-based, per dataset.\n\n";
    out += detail::render_card_table(card, Scenario::personalized,
                                     "Performance of a subject-specific model");
    out += detail::render_card_table(
        card, Scenario::subject_independent_single,
        "Performance of a subject-independent model cross-validated on a single dataset");
    out += detail::render_card_table(
        card, Scenario::subject_independent_cross,
        "Performance of a subject-independent model trained on an independent dataset");
    return out;
}

inline ModelCard parse_model_card(const std::string& text) {
    json j = json::parse(text);
    ModelCard card;
    card.model_name = j.at("modelName");
    card.developers = j.at("contact").at("developers");
    card.institution = j.at("contact").at("institution");
    card.contact_email = j.at("contact").at("email");
    card.source_link = j.at("model").at("sourceLink");
    card.citation = j.at("model").at("citation");
    card.description = j.at("model").at("description");
    card.scoring_params = j.value("scoringParams", json(json::object()));
    card.plan_digest = j.value("planDigest", "");
    for (const json& r : j.at("results"))
        card.results.push_back(dataset_result_from_json(r));
    return card;
}

// ---- Reproducibility checklist ----

struct ChecklistItem {
    std::string key;
    std::string section;
    std::string text;
};

inline const std::vector<ChecklistItem>& checklist_items() {
    static const std::vector<ChecklistItem> items = {
        {"model.description", "Models and algorithms",
         "Clear description of the mathematical setting, algorithm and/or model, "
         "including assumptions and parameters"},
        {"model.input", "Models and algorithms",
         "Description of the input data, specifying sampling frequency and number "
         "of channels"},
        {"model.complexity", "Models and algorithms",
         "Analysis of the complexity (time, space, sample size) of the algorithm"},
        {"data.description", "Datasets",
         "Description of the dataset: number of subjects, number of seizures, "
         "seizure type and recording duration"},
        {"data.splits", "Datasets",
         "Details of the train/validation/test splits respecting subject "
         "independence and chronology"},
        {"data.exclusions", "Datasets",
         "Explanation of any excluded data and all pre-processing steps"},
        {"data.link", "Datasets", "Link to a downloadable version of the dataset"},
        {"data.collection", "Datasets",
         "For newly collected data: collection process, annotator instructions, "
         "quality control, and a BIDS-EEG/HED-SCORE compatible version"},
        {"code.dependencies", "Code", "Specification of dependencies"},
        {"code.training", "Code", "Training code"},
        {"code.evaluation", "Code", "Evaluation code"},
        {"code.models", "Code", "(Pre-)trained model(s)"},
        {"code.readme", "Code",
         "README with a table of results and the precise commands to reproduce them"},
        {"results.hyperparameters", "Experimental results",
         "Hyper-parameter ranges, selection method, and final configuration"},
        {"results.runs", "Experimental results",
         "Exact number of training and evaluation runs"},
        {"results.measures", "Experimental results",
         "Clear definition of the measures or statistics used to report results"},
        {"results.metrics", "Experimental results",
         "Report of sensitivity, precision, F1-score and false alarms per day"},
        {"results.datasets", "Experimental results",
         "Results on the public datasets (CHB-MIT, TUH, Siena, SeizeIT1)"},
        {"results.runtime", "Experimental results",
         "Average runtime per result, or estimated energy cost"},
        {"results.infrastructure", "Experimental results",
         "Description of the computing infrastructure used"},
    };
    return items;
}

// answers: item key -> note (may be empty); present keys render as
// completed, absent keys as missing.
inline std::string emit_checklist(const std::map<std::string, std::string>& answers) {
    for (const auto& [key, note] : answers) {
        bool known = false;
        for (const ChecklistItem& item : checklist_items())
            if (item.key == key) { known = true; break; }
        if (!known) throw reporting_error("unknown checklist item key '" + key + "'");
    }
    std::string out = "## Reproducibility checklist\n";
    std::string section;
    int missing = 0;
    for (const ChecklistItem& item : checklist_items()) {
        if (item.section != section) {
            section = item.section;
            out += "\n### " + section + "\n";
        }
        auto it = answers.find(item.key);
        if (it != answers.end()) {
            out += "- [x] " + item.text;
            if (!it->second.empty()) out += " (" + it->second + ")";
            out += "\n";
        } else {
            out += "- [ ] " + item.text + " (missing)\n";
            ++missing;
        }
    }
    out += "\nCompleted " +
           std::to_string(checklist_items().size() - static_cast<std::size_t>(missing)) +
           "/" + std::to_string(checklist_items().size()) + " items.\n";
    return out;
}

} // namespace szval
