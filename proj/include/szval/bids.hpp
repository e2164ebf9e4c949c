#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace szval {

namespace fs = std::filesystem;

inline constexpr const char* kDefaultTask = "szMonitoring";
inline constexpr const char* kDefaultDerivative = "szDetection";

// One recording's identity within a BIDS tree.
struct RunId {
    std::string subject; // "01"
    std::string session; // "01"
    std::string task = kDefaultTask;
    std::string run;     // "00"

    std::string stem() const {
        return "sub-" + subject + "_ses-" + session + "_task-" + task + "_run-" + run;
    }
    friend auto operator<=>(const RunId&, const RunId&) = default;
};

struct RunEntry {
    RunId id;
    fs::path eeg_path;            // .edf
    fs::path events_path;         // _events.tsv, empty if missing
    fs::path sidecar_path;        // _eeg.json, empty if missing
};

struct DatasetIndex {
    fs::path root;
    std::vector<std::string> subjects;   // sorted
    std::vector<RunEntry> runs;          // sorted by RunId
    std::vector<std::string> warnings;
    std::vector<std::string> errors;     // e.g. orphan .edf without events file
};

namespace detail {

// sub-XX_ses-YY_task-ZZ_run-NN[_suffix]
inline std::optional<RunId> parse_bids_stem(const std::string& stem) {
    RunId id;
    auto take = [&](const std::string& key, std::size_t& pos) -> std::optional<std::string> {
        if (stem.compare(pos, key.size(), key) != 0) return std::nullopt;
        pos += key.size();
        std::size_t end = stem.find('_', pos);
        std::string value = stem.substr(pos, end == std::string::npos ? end : end - pos);
        pos = (end == std::string::npos) ? stem.size() : end + 1;
        return value;
    };
    std::size_t pos = 0;
    auto sub = take("sub-", pos);
    auto ses = take("ses-", pos);
    auto task = take("task-", pos);
    auto run = take("run-", pos);
    if (!sub || !ses || !task || !run || sub->empty() || run->empty()) return std::nullopt;
    id.subject = *sub;
    id.session = *ses;
    id.task = *task;
    id.run = *run;
    return id;
}

} // namespace detail

// Walk a BIDS-EEG tree and collect every run with its sibling files.
// Output is sorted so indexing is independent of filesystem enumeration
// order. Unparseable names become warnings, orphan EDFs become errors.
inline DatasetIndex index_dataset(const fs::path& root) {
    DatasetIndex index;
    index.root = root;
    if (!fs::exists(root)) {
        index.errors.push_back("dataset root does not exist: " + root.string());
        return index;
    }
    if (!fs::exists(root / "dataset_description.json"))
        index.warnings.push_back("missing dataset_description.json");

    std::vector<fs::path> edfs;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().extension() == ".edf") edfs.push_back(entry.path());
    }
    std::sort(edfs.begin(), edfs.end());

    for (const fs::path& edf : edfs) {
        std::string stem = edf.stem().string();
        // strip the _eeg suffix if present
        if (stem.size() > 4 && stem.ends_with("_eeg")) stem.resize(stem.size() - 4);
        auto id = detail::parse_bids_stem(stem);
        if (!id) {
            index.warnings.push_back("unparseable BIDS name: " + edf.string());
            continue;
        }
        RunEntry run;
        run.id = *id;
        run.eeg_path = edf;
        fs::path events = edf.parent_path() / (id->stem() + "_events.tsv");
        fs::path sidecar = edf.parent_path() / (id->stem() + "_eeg.json");
        if (fs::exists(events))
            run.events_path = events;
        else
            index.errors.push_back("orphan EDF without events file: " + edf.string());
        if (fs::exists(sidecar)) run.sidecar_path = sidecar;
        index.runs.push_back(std::move(run));
    }
    std::sort(index.runs.begin(), index.runs.end(),
              [](const RunEntry& a, const RunEntry& b) { return a.id < b.id; });
    for (const RunEntry& r : index.runs)
        if (index.subjects.empty() || index.subjects.back() != r.id.subject)
            index.subjects.push_back(r.id.subject);
    std::sort(index.subjects.begin(), index.subjects.end());
    index.subjects.erase(std::unique(index.subjects.begin(), index.subjects.end()),
                         index.subjects.end());
    if (index.runs.empty() && index.errors.empty())
        index.warnings.push_back("no runs found under " + root.string());
    return index;
}

// <root>/<derivativeName>/sub-XX/ses-YY/sub-..._events.tsv, mirroring the
// subject/session structure of the source tree.
inline fs::path derivative_path_for(const fs::path& root, const RunId& id,
                                    const std::string& derivative_name = kDefaultDerivative) {
    return root / derivative_name / ("sub-" + id.subject) / ("ses-" + id.session) /
           (id.stem() + "_events.tsv");
}

struct ScoringPair {
    RunId id;
    fs::path reference_events;
    fs::path hypothesis_events;
    fs::path recording;
};

struct PairingResult {
    std::vector<ScoringPair> pairs;
    std::vector<RunEntry> missing_hypothesis; // scored as all-missed downstream
};

inline PairingResult pair_hypothesis_with_reference(
    const DatasetIndex& index, const std::string& derivative_name = kDefaultDerivative) {
    PairingResult result;
    for (const RunEntry& run : index.runs) {
        if (run.events_path.empty()) continue; // already an index error
        fs::path hyp = derivative_path_for(index.root, run.id, derivative_name);
        if (fs::exists(hyp))
            result.pairs.push_back({run.id, run.events_path, hyp, run.eeg_path});
        else
            result.missing_hypothesis.push_back(run);
    }
    return result;
}

} // namespace szval
