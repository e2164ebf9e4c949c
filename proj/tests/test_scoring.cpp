#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"
#include "szval/scoring.hpp"

using namespace szval;

namespace {

EventList make_list(std::initializer_list<Interval> intervals,
                    double duration = 3600.0) {
    std::vector<Interval> v(intervals);
    return oracle::intervals_to_event_list(v, duration);
}

} // namespace

TEST_CASE("events_to_mask labels the worked examples") {
    // 40 s event at 296 s in a one-hour recording
    LabelMask mask = events_to_mask(make_list({{296.0, 336.0}}));
    CHECK(mask.labels.size() == 3600);
    std::int64_t ones = 0;
    for (auto v : mask.labels) ones += v;
    CHECK(ones == 40);
    CHECK(mask.labels[295] == 0);
    CHECK(mask.labels[296] == 1);
    CHECK(mask.labels[335] == 1);
    CHECK(mask.labels[336] == 0);
}

TEST_CASE("events_to_mask strict half-second rule") {
    LabelMask mask = events_to_mask(make_list({{10.6, 12.6}}, 20.0));
    CHECK(mask.labels[10] == 0); // 0.4 s overlap
    CHECK(mask.labels[11] == 1); // 1.0 s
    CHECK(mask.labels[12] == 1); // 0.6 s
    // exactly 0.5 s of overlap labels 0
    LabelMask half = events_to_mask(make_list({{10.5, 11.0}}, 20.0));
    CHECK(half.labels[10] == 0);
}

TEST_CASE("events_to_mask with no seizures is all zero") {
    EventList list;
    list.recording_duration = 10.5;
    LabelMask mask = events_to_mask(list);
    CHECK(mask.labels.size() == 11);
    for (auto v : mask.labels) CHECK(v == 0);
}

TEST_CASE("score_samples counts per-second agreement") {
    LabelMask ref, hyp;
    ref.labels = {1, 1, 0, 0};
    hyp.labels = {0, 1, 1, 0};
    ScoreCounts c = score_samples(ref, hyp);
    CHECK(c.tp == 1);
    CHECK(c.fp == 1);
    CHECK(c.fn() == 1);
    CHECK(c.ref_true == 2);

    hyp.labels = {1, 1, 0, 0};
    ScoreCounts identity = score_samples(ref, hyp);
    CHECK(identity.tp == 2);
    CHECK(identity.fp == 0);
    CHECK(identity.fn() == 0);

    hyp.labels = {0, 1};
    CHECK_THROWS_AS(score_samples(ref, hyp), std::invalid_argument);
}

TEST_CASE("preprocess_events merge and split rules") {
    ScoringParams params;
    SUBCASE("gap below merge threshold merges") {
        auto out = preprocess_events({{0, 10}, {50, 60}}, params);
        REQUIRE(out.size() == 1);
        CHECK(out[0] == Interval{0, 60});
    }
    SUBCASE("long event splits into 300 s chunks") {
        auto out = preprocess_events({{0, 720}}, params);
        REQUIRE(out.size() == 3);
        CHECK(out[0] == Interval{0, 300});
        CHECK(out[1] == Interval{300, 600});
        CHECK(out[2] == Interval{600, 720});
    }
    SUBCASE("gap at or above threshold stays split") {
        auto out = preprocess_events({{0, 10}, {200, 210}}, params);
        REQUIRE(out.size() == 2);
        CHECK(out[0] == Interval{0, 10});
        CHECK(out[1] == Interval{200, 210});
    }
    SUBCASE("unsorted and overlapping inputs are unioned") {
        auto out = preprocess_events({{500, 600}, {0, 100}, {50, 150}}, params);
        REQUIRE(out.size() == 2);
        CHECK(out[0] == Interval{0, 150});
        CHECK(out[1] == Interval{500, 600});
    }
}

TEST_CASE("preprocess_events is idempotent") {
    oracle::Rng rng(7);
    ScoringParams params;
    for (int i = 0; i < 200; ++i) {
        auto ivs = oracle::random_intervals(rng, 3600.0);
        auto once = preprocess_events(ivs, params);
        auto twice = preprocess_events(once, params);
        CHECK(once == twice);
    }
}

TEST_CASE("score_events tolerance and boundary semantics") {
    ScoringParams params;
    SUBCASE("full overlap") {
        ScoreCounts c = score_events(make_list({{100, 140}}), make_list({{95, 150}}),
                                     params);
        CHECK(c.tp == 1);
        CHECK(c.fp == 0);
        CHECK(c.fn() == 0);
    }
    SUBCASE("detection inside the pre-ictal tolerance band") {
        ScoreCounts c = score_events(make_list({{100, 140}}), make_list({{72, 74}}),
                                     params);
        CHECK(c.tp == 1);
        CHECK(c.fp == 0);
    }
    SUBCASE("half-open intervals do not match at a shared endpoint") {
        // extended reference starts at exactly 70
        ScoreCounts c = score_events(make_list({{100, 140}}), make_list({{60, 70}}),
                                     params);
        CHECK(c.tp == 0);
        CHECK(c.fp == 1);
        CHECK(c.fn() == 1);
    }
    SUBCASE("one hypothesis detecting two references") {
        ScoreCounts c = score_events(make_list({{100, 140}, {400, 440}}),
                                     make_list({{90, 450}}), params);
        CHECK(c.tp == 2);
        CHECK(c.fp == 0);
    }
    SUBCASE("duration mismatch is an error") {
        CHECK_THROWS_AS(score_events(make_list({{100, 140}}, 3600.0),
                                     make_list({{100, 140}}, 1800.0), params),
                        std::invalid_argument);
    }
}

TEST_CASE("score_events equals the 1 ms brute-force oracle") {
    oracle::Rng rng(42);
    ScoringParams params;
    const double duration = 3600.0;
    for (int i = 0; i < 300; ++i) {
        auto ref = oracle::random_intervals(rng, duration);
        auto hyp = oracle::random_intervals(rng, duration);
        ScoreCounts got = score_events(oracle::intervals_to_event_list(ref, duration),
                                       oracle::intervals_to_event_list(hyp, duration),
                                       params);
        oracle::Counts want = oracle::score_events_bruteforce(ref, hyp, params, duration);
        REQUIRE(got.tp == want.tp);
        REQUIRE(got.fp == want.fp);
        REQUIRE(got.ref_true == want.ref_true);
    }
}

TEST_CASE("enlarging tolerances never hurts tp or helps fp") {
    oracle::Rng rng(11);
    const double duration = 3600.0;
    for (int i = 0; i < 100; ++i) {
        auto ref = oracle::intervals_to_event_list(oracle::random_intervals(rng, duration),
                                                   duration);
        auto hyp = oracle::intervals_to_event_list(oracle::random_intervals(rng, duration),
                                                   duration);
        ScoringParams narrow, wide;
        wide.pre_ictal_tolerance = 60.0;
        wide.post_ictal_tolerance = 120.0;
        ScoreCounts a = score_events(ref, hyp, narrow);
        ScoreCounts b = score_events(ref, hyp, wide);
        CHECK(b.tp >= a.tp);
        CHECK(b.fp <= a.fp);
    }
}

TEST_CASE("degenerate hypothesis cases") {
    oracle::Rng rng(5);
    const double duration = 3600.0;
    for (int i = 0; i < 50; ++i) {
        auto ref = oracle::intervals_to_event_list(oracle::random_intervals(rng, duration),
                                                   duration);
        ScoreCounts same = score_events(ref, ref, {});
        CHECK(same.fp == 0);
        CHECK(same.fn() == 0);
        EventList empty;
        empty.date_time = ref.date_time;
        empty.recording_duration = duration;
        ScoreCounts missed = score_events(ref, empty, {});
        CHECK(missed.tp == 0);
        CHECK(missed.fp == 0);
    }
}

TEST_CASE("split bound and spacing after preprocessing") {
    oracle::Rng rng(23);
    ScoringParams params;
    for (int i = 0; i < 100; ++i) {
        auto out = preprocess_events(oracle::random_intervals(rng, 3600.0), params);
        for (std::size_t k = 0; k < out.size(); ++k) {
            CHECK(out[k].length() <= params.max_event_duration + 1e-9);
            if (k > 0) {
                double gap = out[k].start - out[k - 1].end;
                CHECK((gap >= params.merge_gap - 1e-9 || gap <= 1e-9));
            }
        }
    }
}

TEST_CASE("compute_metrics formulas") {
    ScoreCounts c;
    c.tp = 3;
    c.ref_true = 4; // fn = 1
    c.fp = 2;
    c.total_duration_seconds = 43200.0;
    Metrics m = compute_metrics(c);
    REQUIRE(m.sensitivity.has_value());
    REQUIRE(m.precision.has_value());
    REQUIRE(m.f1.has_value());
    CHECK(*m.sensitivity == doctest::Approx(0.75));
    CHECK(*m.precision == doctest::Approx(0.6));
    CHECK(*m.f1 == doctest::Approx(2.0 * 0.75 * 0.6 / 1.35));
    CHECK(m.fp_per_day == doctest::Approx(4.0));
}

TEST_CASE("compute_metrics undefined propagation") {
    ScoreCounts c;
    c.total_duration_seconds = 3600.0;
    Metrics m = compute_metrics(c);
    CHECK(!m.sensitivity.has_value());
    CHECK(!m.precision.has_value());
    CHECK(!m.f1.has_value());
    CHECK(m.fp_per_day == 0.0);

    c.total_duration_seconds = 0.0;
    CHECK_THROWS_AS(compute_metrics(c), std::invalid_argument);
}

TEST_CASE("aggregate_counts sums fields and rejects mixed kinds") {
    ScoreCounts a, b;
    a.tp = 1;
    a.ref_true = 1;
    a.total_duration_seconds = 100.0;
    b.tp = 2;
    b.fp = 1;
    b.ref_true = 3;
    b.total_duration_seconds = 200.0;
    ScoreCounts sum = aggregate_counts({a, b});
    CHECK(sum.tp == 3);
    CHECK(sum.fp == 1);
    CHECK(sum.ref_true == 4);
    CHECK(sum.total_duration_seconds == doctest::Approx(300.0));

    CHECK(aggregate_counts({a}) == a);
    ScoreCounts zero = aggregate_counts({});
    CHECK(zero.tp == 0);
    CHECK(zero.total_duration_seconds == 0.0);

    b.kind = CountKind::sample;
    CHECK_THROWS_AS(aggregate_counts({a, b}), std::invalid_argument);
}

TEST_CASE("score_run returns both scoring modes consistently") {
    auto ref = make_list({{100, 140}, {500, 560}});
    RunScores same = score_run(ref, ref, {});
    CHECK(same.event_counts.tp == 2);
    CHECK(same.event_counts.fp == 0);
    CHECK(same.sample_counts.tp == 100);
    CHECK(same.sample_counts.fp == 0);

    EventList empty;
    empty.date_time = ref.date_time;
    empty.recording_duration = ref.recording_duration;
    RunScores missed = score_run(ref, empty, {});
    CHECK(missed.event_counts.fn() == 2);
    CHECK(missed.sample_counts.fn() == 100);
}

TEST_CASE("mask matches brute-force interval arithmetic") {
    oracle::Rng rng(99);
    const double duration = 3600.0;
    for (int i = 0; i < 100; ++i) {
        auto ivs = oracle::random_intervals(rng, duration);
        LabelMask mask = events_to_mask(oracle::intervals_to_event_list(ivs, duration));
        auto want = oracle::mask_bruteforce(ivs, duration);
        REQUIRE(mask.labels == want);
    }
}
