#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "szval/cv.hpp"

using namespace szval;

namespace {

// one contiguous recording starting at a fixed date
TimelineSegment segment(const std::string& run, double start_offset_hours,
                        double duration_hours, std::vector<double> onsets = {}) {
    TimelineSegment seg;
    seg.subject = "01";
    seg.run = run;
    std::int64_t base = to_epoch_seconds({2016, 11, 6, 0, 0, 0});
    std::int64_t start = base + static_cast<std::int64_t>(start_offset_hours * 3600.0);
    // rebuild the DateTime from epoch seconds
    std::int64_t days = start / 86400;
    std::int64_t rem = start % 86400;
    seg.start_date_time = {2016, 11, 6,
                           static_cast<int>(rem / 3600),
                           static_cast<int>((rem / 60) % 60),
                           static_cast<int>(rem % 60)};
    // adjust day if the offset crosses midnight (fixture stays within a month)
    seg.start_date_time.day = static_cast<int>(6 + (days - base / 86400));
    seg.duration_seconds = duration_hours * 3600.0;
    seg.seizure_onsets = std::move(onsets);
    return seg;
}

} // namespace

TEST_CASE("variable-mode time-series folds on an 8 h recording") {
    // one 8 h run with a seizure 2 h in: the initial window stays at 5 h
    auto plan = plan_tscv({segment("01", 0, 8, {7200.0})});
    REQUIRE(plan.folds.size() == 3);
    for (std::size_t f = 0; f < 3; ++f) {
        const Fold& fold = plan.folds[f];
        REQUIRE(fold.train.size() == 1);
        REQUIRE(fold.test.size() == 1);
        CHECK(fold.train[0].offset_seconds == 0.0);
        CHECK(fold.train[0].length_seconds ==
              doctest::Approx(18000.0 + 3600.0 * static_cast<double>(f)));
        CHECK(fold.test[0].offset_seconds ==
              doctest::Approx(18000.0 + 3600.0 * static_cast<double>(f)));
        CHECK(fold.test[0].length_seconds == doctest::Approx(3600.0));
        CHECK(fold.test[0].run == "01");
    }
    CHECK(verify_plan(plan, PlanKind::personalized).empty());
}

TEST_CASE("initial window extends past a late first seizure") {
    // seizure at 5.5 h: the 5 h window has no seizure, so it grows to the
    // 6 h step boundary, leaving two 1 h test folds in 8 h of data
    auto plan = plan_tscv({segment("01", 0, 8, {19800.0})});
    REQUIRE(plan.folds.size() == 2);
    CHECK(plan.folds[0].train[0].length_seconds == doctest::Approx(21600.0));
    CHECK(plan.folds[0].test[0].offset_seconds == doctest::Approx(21600.0));
    CHECK(plan.folds[1].test[0].offset_seconds == doctest::Approx(25200.0));
    CHECK(plan.folds[1].test[0].length_seconds == doctest::Approx(3600.0));
}

TEST_CASE("fixed-mode training window slides with constant length") {
    TscvParams params;
    params.mode = TscvMode::fixed;
    auto plan = plan_tscv({segment("01", 0, 8, {7200.0})}, params);
    REQUIRE(plan.folds.size() == 3);
    for (std::size_t f = 0; f < 3; ++f) {
        const Fold& fold = plan.folds[f];
        double train_len = 0.0;
        for (const PlanRegion& r : fold.train) train_len += r.length_seconds;
        CHECK(train_len == doctest::Approx(18000.0));
        CHECK(fold.train[0].offset_seconds ==
              doctest::Approx(3600.0 * static_cast<double>(f)));
    }
    CHECK(verify_plan(plan, PlanKind::personalized).empty());
}

TEST_CASE("wall-clock gaps between runs count toward the timeline") {
    // two 3 h runs separated by a 2 h gap: folds cover wall-clock hours,
    // and test windows inside the gap are dropped
    auto plan = plan_tscv({segment("01", 0, 3, {3600.0}), segment("02", 5, 3)});
    REQUIRE(!plan.folds.empty());
    // total wall-clock span is 8 h; test folds start at the 5 h boundary
    CHECK(plan.folds.size() == 3);
    for (const Fold& fold : plan.folds) {
        for (const PlanRegion& r : fold.test) CHECK(r.run == "02");
    }
    // the first fold trains on all of run 01 plus nothing of run 02
    CHECK(plan.folds[0].train.size() == 1);
    CHECK(plan.folds[0].train[0].run == "01");
    CHECK(plan.folds[0].train[0].length_seconds == doctest::Approx(10800.0));
    CHECK(verify_plan(plan, PlanKind::personalized).empty());
}

TEST_CASE("partial final fold is emitted") {
    auto plan = plan_tscv({segment("01", 0, 6.5, {1800.0})});
    REQUIRE(plan.folds.size() == 2);
    CHECK(plan.folds[1].test[0].length_seconds == doctest::Approx(1800.0));
}

TEST_CASE("degenerate timelines are rejected") {
    CHECK_THROWS_AS(plan_tscv({}), cv_error);
    CHECK_THROWS_WITH_AS(plan_tscv({segment("01", 0, 4, {600.0})}),
                         doctest::Contains("too short"), cv_error);
    CHECK_THROWS_WITH_AS(plan_tscv({segment("01", 0, 8)}),
                         doctest::Contains("requires at least"), cv_error);
    TimelineSegment other = segment("01", 0, 8, {600.0});
    other.subject = "02";
    CHECK_THROWS_WITH_AS(plan_tscv({segment("01", 0, 8, {600.0}), other}),
                         doctest::Contains("single subject"), cv_error);
    TscvParams bad;
    bad.step_hours = 0.0;
    CHECK_THROWS_AS(plan_tscv({segment("01", 0, 8, {600.0})}, bad), cv_error);
}

TEST_CASE("long timelines carry a warning") {
    auto plan = plan_tscv({segment("01", 0, 8, {600.0}),
                           segment("02", 8 * 24, 8)});
    REQUIRE(plan.warnings.size() == 1);
    CHECK(plan.warnings[0].find("7 days") != std::string::npos);
}

TEST_CASE("personalized eligibility thresholds") {
    CHECK(personalized_exclusion_reason({segment("01", 0, 2, {10, 20, 30})}).empty());
    CHECK(personalized_exclusion_reason({segment("01", 0, 2, {10, 20})})
              .find("2 seizures") != std::string::npos);
    CHECK(personalized_exclusion_reason({segment("01", 0, 1.0, {10, 20, 30})})
              .find("h of data") != std::string::npos);
    // thresholds are inclusive
    CHECK(personalized_exclusion_reason({segment("01", 0, 1.5, {10, 20, 30})}).empty());
}

TEST_CASE("leave-one-out over subjects") {
    auto plan = plan_loo({"03", "01", "02", "01"});
    REQUIRE(plan.folds.size() == 3);
    for (std::size_t f = 0; f < 3; ++f) {
        CHECK(plan.folds[f].test.size() == 1);
        CHECK(plan.folds[f].train.size() == 2);
        CHECK(plan.folds[f].test[0].whole_subject());
    }
    CHECK(plan.folds[0].test[0].subject == "01");
    CHECK(plan.folds[2].test[0].subject == "03");
    CHECK(verify_plan(plan, PlanKind::subject_independent).empty());
    CHECK_THROWS_AS(plan_loo({"01"}), cv_error);
}

TEST_CASE("k-fold partitions every subject exactly once") {
    std::vector<std::string> subjects;
    for (int i = 1; i <= 10; ++i)
        subjects.push_back(i < 10 ? "0" + std::to_string(i) : std::to_string(i));
    auto plan = plan_kfold(subjects, 3, 1234);
    REQUIRE(plan.folds.size() == 3);
    // 10 subjects over 3 folds: test sizes 4, 3, 3
    CHECK(plan.folds[0].test.size() == 4);
    CHECK(plan.folds[1].test.size() == 3);
    CHECK(plan.folds[2].test.size() == 3);
    CHECK(verify_plan(plan, PlanKind::subject_independent).empty());

    // same seed, same plan; different seed, different partition
    CHECK(plan_kfold(subjects, 3, 1234) == plan);
    CHECK(plan_kfold(subjects, 3, 77) != plan);

    // k equal to the subject count degenerates to leave-one-out
    auto kn = plan_kfold(subjects, 10, 5);
    auto loo = plan_loo(subjects);
    std::vector<std::string> kn_tests, loo_tests;
    for (const Fold& f : kn.folds) kn_tests.push_back(f.test.at(0).subject);
    for (const Fold& f : loo.folds) loo_tests.push_back(f.test.at(0).subject);
    std::sort(kn_tests.begin(), kn_tests.end());
    CHECK(kn_tests == loo_tests);
    for (const Fold& f : kn.folds) CHECK(f.train.size() == 9);

    CHECK_THROWS_AS(plan_kfold(subjects, 1, 0), cv_error);
    CHECK_THROWS_AS(plan_kfold(subjects, 11, 0), cv_error);
}

TEST_CASE("fixed split") {
    auto plan = plan_fixed({"01", "02"}, {"03"});
    REQUIRE(plan.folds.size() == 1);
    CHECK(plan.folds[0].train.size() == 2);
    CHECK(plan.folds[0].test.size() == 1);
    CHECK(verify_plan(plan, PlanKind::subject_independent).empty());
    CHECK_THROWS_WITH_AS(plan_fixed({"01"}, {"01"}), doctest::Contains("both"),
                         cv_error);
    CHECK_THROWS_AS(plan_fixed({"01"}, {}), cv_error);
}

TEST_CASE("verify_plan flags violations") {
    SUBCASE("subject leakage") {
        FoldPlan plan;
        Fold fold;
        fold.train.push_back(whole_subject_region("01"));
        fold.test.push_back(whole_subject_region("01"));
        plan.folds.push_back(fold);
        auto v = verify_plan(plan, PlanKind::subject_independent);
        REQUIRE(v.size() == 2); // independence + region overlap
        CHECK(v[0].description.find("independence") != std::string::npos);
        CHECK(v[1].description.find("overlap") != std::string::npos);
    }
    SUBCASE("chronology violation") {
        FoldPlan plan;
        Fold fold;
        fold.train.push_back({"01", "01", 0.0, 7200.0, 1000.0});
        fold.test.push_back({"01", "01", 0.0, 3600.0, 2000.0}); // starts before train ends
        plan.folds.push_back(fold);
        auto v = verify_plan(plan, PlanKind::personalized);
        REQUIRE(!v.empty());
        CHECK(v[0].description.find("chronology") != std::string::npos);
    }
    SUBCASE("subject in multiple test sets") {
        FoldPlan plan;
        for (int i = 0; i < 2; ++i) {
            Fold fold;
            fold.train.push_back(whole_subject_region("02"));
            fold.test.push_back(whole_subject_region("01"));
            plan.folds.push_back(fold);
        }
        auto v = verify_plan(plan, PlanKind::subject_independent);
        REQUIRE(v.size() == 1);
        CHECK(v[0].fold_index == -1);
        CHECK(v[0].description.find("2 test sets") != std::string::npos);
    }
}

TEST_CASE("fold-plan manifest round trip") {
    auto plan = plan_kfold({"01", "02", "03", "04"}, 2, 99);
    std::string text = serialize_fold_plan(plan);
    CHECK(text.rfind("fold\trole\tsubject\trun\toffset\tlength\n", 0) == 0);
    FoldPlan back = parse_fold_plan(text);
    CHECK(back == plan);
    CHECK(serialize_fold_plan(back) == text);

    // time-series plans survive as region lists
    auto tscv = plan_tscv({segment("01", 0, 8, {7200.0})});
    std::string tscv_text = serialize_fold_plan(tscv);
    FoldPlan tscv_back = parse_fold_plan(tscv_text);
    CHECK(serialize_fold_plan(tscv_back) == tscv_text);
    REQUIRE(tscv_back.folds.size() == tscv.folds.size());
    CHECK(tscv_back.folds[0].test[0].offset_seconds == doctest::Approx(18000.0));

    CHECK_THROWS_AS(parse_fold_plan("bogus\n"), cv_error);
    CHECK_THROWS_AS(parse_fold_plan("fold\trole\tsubject\trun\toffset\tlength\n"
                                    "0\tjudge\t01\tall\t0\t0\n"),
                    cv_error);
}

TEST_CASE("planning twice yields identical manifests") {
    auto a = serialize_fold_plan(plan_tscv({segment("01", 0, 8, {7200.0})}));
    auto b = serialize_fold_plan(plan_tscv({segment("01", 0, 8, {7200.0})}));
    CHECK(a == b);
    CHECK(serialize_fold_plan(plan_kfold({"a", "b", "c", "d", "e"}, 2, 42)) ==
          serialize_fold_plan(plan_kfold({"e", "d", "c", "b", "a"}, 2, 42)));
}
