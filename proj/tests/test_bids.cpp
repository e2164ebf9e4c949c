#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "szval/bids.hpp"

using namespace szval;

namespace {

void touch(const fs::path& p, const std::string& contents = "x") {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << contents;
}

struct TempTree {
    fs::path root;
    explicit TempTree(const std::string& name) {
        root = fs::temp_directory_path() / name;
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~TempTree() { fs::remove_all(root); }
};

// a small two-subject monitoring dataset with sidecars and derivatives
void make_fixture(const fs::path& root) {
    touch(root / "dataset_description.json", "{\"Name\":\"demo\"}");
    for (const char* sub : {"01", "02"}) {
        for (const char* run : {"01", "02"}) {
            RunId id{sub, "01", kDefaultTask, run};
            fs::path dir = root / ("sub-" + id.subject) / ("ses-" + id.session) / "eeg";
            touch(dir / (id.stem() + "_eeg.edf"));
            touch(dir / (id.stem() + "_events.tsv"));
            touch(dir / (id.stem() + "_eeg.json"), "{}");
        }
    }
}

} // namespace

TEST_CASE("stem parsing") {
    auto id = detail::parse_bids_stem("sub-01_ses-02_task-szMonitoring_run-03");
    REQUIRE(id.has_value());
    CHECK(id->subject == "01");
    CHECK(id->session == "02");
    CHECK(id->task == "szMonitoring");
    CHECK(id->run == "03");
    CHECK(id->stem() == "sub-01_ses-02_task-szMonitoring_run-03");

    CHECK(!detail::parse_bids_stem("sub-01_run-03").has_value());
    CHECK(!detail::parse_bids_stem("recording7").has_value());
    CHECK(!detail::parse_bids_stem("sub-_ses-01_task-t_run-01").has_value());
}

TEST_CASE("RunId ordering is lexicographic by subject, session, task, run") {
    RunId a{"01", "01", kDefaultTask, "02"};
    RunId b{"01", "02", kDefaultTask, "01"};
    RunId c{"02", "01", kDefaultTask, "01"};
    CHECK(a < b);
    CHECK(b < c);
}

TEST_CASE("index a well-formed tree") {
    TempTree t("szval_bids_ok");
    make_fixture(t.root);

    DatasetIndex index = index_dataset(t.root);
    CHECK(index.errors.empty());
    CHECK(index.warnings.empty());
    CHECK(index.subjects == std::vector<std::string>{"01", "02"});
    REQUIRE(index.runs.size() == 4);
    CHECK(index.runs[0].id.stem() == "sub-01_ses-01_task-szMonitoring_run-01");
    CHECK(index.runs[3].id.stem() == "sub-02_ses-01_task-szMonitoring_run-02");
    for (const RunEntry& run : index.runs) {
        CHECK(!run.eeg_path.empty());
        CHECK(!run.events_path.empty());
        CHECK(!run.sidecar_path.empty());
    }
}

TEST_CASE("orphan EDF is an error, stray file a warning") {
    TempTree t("szval_bids_orphan");
    make_fixture(t.root);
    fs::remove(t.root / "sub-01" / "ses-01" / "eeg" /
               "sub-01_ses-01_task-szMonitoring_run-01_events.tsv");
    touch(t.root / "sub-01" / "ses-01" / "eeg" / "notes.edf");

    DatasetIndex index = index_dataset(t.root);
    REQUIRE(index.errors.size() == 1);
    CHECK(index.errors[0].find("orphan EDF") != std::string::npos);
    REQUIRE(index.warnings.size() == 1);
    CHECK(index.warnings[0].find("notes.edf") != std::string::npos);
    CHECK(index.runs.size() == 4); // the orphan is still listed, without events
}

TEST_CASE("missing description and empty root produce warnings") {
    TempTree t("szval_bids_empty");
    DatasetIndex index = index_dataset(t.root);
    CHECK(index.errors.empty());
    REQUIRE(index.warnings.size() == 2);
    CHECK(index.warnings[0].find("dataset_description") != std::string::npos);
    CHECK(index.warnings[1].find("no runs") != std::string::npos);

    DatasetIndex gone = index_dataset(t.root / "nope");
    REQUIRE(gone.errors.size() == 1);
    CHECK(gone.errors[0].find("does not exist") != std::string::npos);
}

TEST_CASE("derivative paths mirror the source layout") {
    RunId id{"05", "02", kDefaultTask, "01"};
    fs::path p = derivative_path_for("/data/ds", id);
    CHECK(p == fs::path("/data/ds/szDetection/sub-05/ses-02/"
                        "sub-05_ses-02_task-szMonitoring_run-01_events.tsv"));
    fs::path q = derivative_path_for("/data/ds", id, "myDetector");
    CHECK(q.string().find("myDetector") != std::string::npos);
}

TEST_CASE("pairing hypothesis with reference events") {
    TempTree t("szval_bids_pairs");
    make_fixture(t.root);
    // provide hypothesis files for subject 01 only
    for (const char* run : {"01", "02"}) {
        RunId id{"01", "01", kDefaultTask, run};
        touch(derivative_path_for(t.root, id));
    }
    DatasetIndex index = index_dataset(t.root);
    PairingResult pairs = pair_hypothesis_with_reference(index);
    REQUIRE(pairs.pairs.size() == 2);
    REQUIRE(pairs.missing_hypothesis.size() == 2);
    CHECK(pairs.pairs[0].id.subject == "01");
    CHECK(pairs.missing_hypothesis[0].id.subject == "02");
    CHECK(fs::exists(pairs.pairs[0].hypothesis_events));
    CHECK(fs::exists(pairs.pairs[0].reference_events));
}

TEST_CASE("indexing is stable under re-runs") {
    TempTree t("szval_bids_stable");
    make_fixture(t.root);
    DatasetIndex a = index_dataset(t.root);
    DatasetIndex b = index_dataset(t.root);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].id == b.runs[i].id);
        CHECK(a.runs[i].eeg_path == b.runs[i].eeg_path);
    }
}
