#include "doctest.h"

#include <cmath>
#include <set>

#include "emgpr/error.hpp"
#include "emgpr/rng.hpp"
#include "emgpr/windowing.hpp"

using namespace emgpr;

namespace {

/// One channel whose value is the sample index; labels supplied per sample.
Recording ramp(std::size_t length, std::vector<int> stim = {}, std::vector<int> rep = {},
               std::size_t channels = 1) {
    if (stim.empty()) stim.assign(length, 1);
    if (rep.empty()) rep.assign(length, 1);
    Matrix m(length, channels);
    for (std::size_t i = 0; i < length; ++i) {
        for (std::size_t c = 0; c < channels; ++c) m(i, c) = static_cast<double>(i + 1000 * c);
    }
    return Recording(1, "test", 1000.0, std::move(m), std::move(stim), std::move(rep));
}

WindowSpec samples_spec(std::size_t w, std::size_t inc, double rate = 1000.0) {
    // at 1 kHz one millisecond is one sample
    WindowSpec s;
    s.length_ms = static_cast<double>(w) * 1000.0 / rate;
    s.increment_ms = static_cast<double>(inc) * 1000.0 / rate;
    s.latency_limit_ms.reset();
    return s;
}

Recording ramp_at(double rate, std::size_t length) {
    Matrix m(length, 1);
    for (std::size_t i = 0; i < length; ++i) m(i, 0) = static_cast<double>(i);
    return Recording(1, "test", rate, std::move(m), std::vector<int>(length, 1),
                     std::vector<int>(length, 1));
}

Segment constant_segment(double v, int label = 1, std::size_t channels = 2, std::size_t w = 3) {
    Segment s;
    s.num_channels = channels;
    s.length = w;
    s.samples.assign(channels * w, v);
    s.label = label;
    s.repetition = 1;
    return s;
}

} // namespace

TEST_CASE("sample arithmetic") {
    const WindowSpec spec;
    CHECK(spec.length_samples(2000) == 512);
    CHECK(spec.stride_samples(2000) == 20);
    WindowSpec adj = spec;
    adj.mode = WindowMode::adjacent;
    CHECK(adj.stride_samples(2000) == 512);
    CHECK(WindowSpec{.length_ms = 200}.length_samples(2000) == 400);
    // floor, not round
    CHECK(WindowSpec{.length_ms = 2.9}.length_samples(1000) == 2);
}

TEST_CASE("overlapped window count") {
    Recording rec = ramp_at(2000, 1000);
    const auto segs = segment(rec, WindowSpec{});
    CHECK(segs.size() == 25);
    for (std::size_t n = 0; n < segs.size(); ++n) {
        CHECK(segs[n].start_sample == 20 * n);
        CHECK(segs[n].window_index == n);
        CHECK(segs[n].length == 512);
        CHECK(segs[n].channel(0)[0] == static_cast<double>(20 * n));
        CHECK(segs[n].start_sample + segs[n].length <= rec.length());
    }
}

TEST_CASE("adjacent tiling") {
    Recording rec = ramp_at(2000, 1024);
    const auto segs = segment(rec, {.mode = WindowMode::adjacent});
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].start_sample == 0);
    CHECK(segs[1].start_sample == 512);
}

TEST_CASE("segment layout is channel-major") {
    const auto rec = ramp(10, {}, {}, 3);
    const auto segs = segment(rec, samples_spec(4, 2));
    REQUIRE(segs.size() == 4);
    const auto& s = segs[1];
    CHECK(s.num_channels == 3);
    CHECK(s.samples.size() == 12);
    CHECK(s.channel(2)[0] == 2002.0);
    CHECK(s.channel(0)[3] == 5.0);
}

TEST_CASE("window spec errors") {
    const auto rec = ramp(10);
    CHECK_THROWS_AS(segment(rec, samples_spec(11, 1)), InputTooShortError);
    CHECK_THROWS_AS(segment(rec, samples_spec(1, 1)), SpecError);
    CHECK_THROWS_AS(segment(rec, samples_spec(4, 5)), SpecError);
    WindowSpec too_long{.length_ms = 400};
    CHECK_THROWS_AS(too_long.validate(2000), SpecError);
    too_long.latency_limit_ms.reset();
    CHECK_NOTHROW(too_long.validate(2000));
}

TEST_CASE("label policies") {
    // stimulus 1 for 6 samples, then 2 for 4 samples
    std::vector<int> stim{1, 1, 1, 1, 1, 1, 2, 2, 2, 2};
    std::vector<int> rep{3, 3, 3, 3, 3, 3, 4, 4, 4, 4};
    const auto rec = ramp(10, stim, rep);

    auto spec = samples_spec(4, 2);
    const auto maj = segment(rec, spec);
    REQUIRE(maj.size() == 4);
    CHECK(maj[0].label == 1);
    // window [4,8): two of each, tie goes to the lower label
    CHECK(maj[2].label == 1);
    CHECK(maj[2].repetition == 3);
    CHECK(maj[3].label == 2);
    CHECK(maj[3].repetition == 4);

    spec.label_policy = LabelPolicy::endpoint;
    const auto end = segment(rec, spec);
    CHECK(end[1].label == 1);
    CHECK(end[2].label == 2);
    CHECK(end[2].repetition == 4);
    spec.label_policy = LabelPolicy::pure_only;
    const auto pure = segment(rec, spec);
    REQUIRE(pure.size() == 3);
    CHECK(pure[0].window_index == 0);
    CHECK(pure[1].window_index == 1);
    CHECK(pure[2].window_index == 3);
    for (const auto& s : pure) {
        std::set<int> labels;
        for (std::size_t i = s.start_sample; i < s.start_sample + s.length; ++i) {
            labels.insert(stim[i]);
        }
        CHECK(labels.size() == 1);
        CHECK(*labels.begin() == s.label);
    }
}

TEST_CASE("policy names") {
    CHECK(label_policy_from_string("pure") == LabelPolicy::pure_only);
    CHECK(label_policy_from_string("pure_only") == LabelPolicy::pure_only);
    CHECK(to_string(LabelPolicy::endpoint) == "endpoint");
    CHECK(window_mode_from_string("adjacent") == WindowMode::adjacent);
    CHECK_THROWS_AS(label_policy_from_string("best"), ValidationError);
    CHECK(technique_from_string("proposed") == Technique::PROPOSED);
    CHECK_THROWS_AS(technique_from_string("XX"), ValidationError);
}

TEST_CASE("aggregation") {
    SUBCASE("identical segments") {
        std::vector<Segment> segs(5, constant_segment(0.1));
        const auto out = aggregate(segs, {.n = 5});
        REQUIRE(out.size() == 1);
        CHECK(out[0].samples == segs[0].samples);
    }
    SUBCASE("remainder dropped") {
        std::vector<Segment> segs(12, constant_segment(1.0));
        CHECK(aggregate(segs, {.n = 5}).size() == 2);
        CHECK(aggregate(segs, {.n = 5, .sliding = true}).size() == 8);
    }
    SUBCASE("arithmetic mean") {
        std::vector<Segment> segs;
        for (int v = 1; v <= 5; ++v) segs.push_back(constant_segment(v, 1, 1, 1));
        const auto out = aggregate(segs, {.n = 5});
        REQUIRE(out.size() == 1);
        CHECK(out[0].samples == std::vector<double>{3.0});
    }
    SUBCASE("mixed labels dropped") {
        std::vector<Segment> segs;
        for (int i = 0; i < 10; ++i) segs.push_back(constant_segment(i, i < 7 ? 1 : 2));
        const auto out = aggregate(segs, {.n = 5});
        REQUIRE(out.size() == 1);
        CHECK(out[0].samples[0] == 2.0);
    }
    SUBCASE("errors") {
        std::vector<Segment> segs{constant_segment(1), constant_segment(1, 1, 3)};
        CHECK_THROWS_AS(aggregate(segs, {.n = 2}), ShapeError);
        CHECK_THROWS_AS(aggregate(segs, {.n = 0}), SpecError);
    }
}

TEST_CASE("baseline regimes") {
    const auto p = make_baseline_spec(Technique::PROPOSED, 2000);
    CHECK(p.window.length_samples(2000) == 512);
    CHECK(p.window.stride_samples(2000) == 20);
    CHECK_FALSE(p.aggregation);
    const auto wa = make_baseline_spec(Technique::WA, 2000);
    CHECK(wa.window.length_samples(2000) == 400);
    CHECK(wa.window.stride_samples(2000) == 20);
    CHECK_FALSE(wa.aggregation);
    const auto ag = make_baseline_spec(Technique::AG, 2000);
    CHECK(ag.window.length_samples(2000) == 512);
    CHECK(ag.window.stride_samples(2000) == 20);
    REQUIRE(ag.aggregation);
    CHECK(ag.aggregation->n == 5);
    CHECK_FALSE(ag.aggregation->sliding);
}

TEST_SUITE("invariants") {
    TEST_CASE("window count law against enumeration") {
        Rng rng(77);
        for (int t = 0; t < 200; ++t) {
            const std::size_t len = 2 + rng.below(3000);
            const std::size_t w = 2 + rng.below(len - 1);
            const std::size_t inc = 1 + rng.below(w);
            const auto rec = ramp_at(1000, len);
            const auto segs = segment(rec, samples_spec(w, inc));
            std::vector<std::size_t> starts;
            for (std::size_t s = 0; s + w <= len; s += inc) starts.push_back(s);
            REQUIRE(segs.size() == starts.size());
            CHECK(segs.size() == (len - w) / inc + 1);
            for (std::size_t n = 0; n < segs.size(); ++n) {
                CHECK(segs[n].start_sample == starts[n]);
            }
        }
    }

    TEST_CASE("aggregation with n = 1 is the identity") {
        Rng rng(8);
        std::vector<int> stim(600);
        for (std::size_t i = 0; i < stim.size(); ++i) stim[i] = static_cast<int>(i / 97 % 3);
        const auto rec = ramp(600, stim, std::vector<int>(600, 1), 2);
        for (auto policy : {LabelPolicy::majority, LabelPolicy::pure_only}) {
            auto spec = samples_spec(50, 7);
            spec.label_policy = policy;
            const auto segs = segment(rec, spec);
            CHECK(aggregate(segs, {.n = 1}) == segs);
        }
    }

    TEST_CASE("n copies average to the segment") {
        Rng rng(9);
        for (int t = 0; t < 50; ++t) {
            Segment s = constant_segment(0, 2, 3, 17);
            for (auto& v : s.samples) v = rng.normal() * std::pow(10.0, rng.uniform(-5, 5));
            const std::size_t n = 1 + rng.below(9);
            std::vector<Segment> copies(n, s);
            const auto out = aggregate(copies, {.n = n});
            REQUIRE(out.size() == 1);
            CHECK(out[0].samples == s.samples);
        }
    }

    TEST_CASE("pure_only indices are a subset of majority") {
        Rng rng(10);
        for (int t = 0; t < 30; ++t) {
            const std::size_t len = 500 + rng.below(1000);
            std::vector<int> stim(len);
            int cur = 0;
            for (auto& s : stim) {
                if (rng.below(50) == 0) cur = static_cast<int>(rng.below(4));
                s = cur;
            }
            const auto rec = ramp(len, stim);
            auto spec = samples_spec(20 + rng.below(60), 1 + rng.below(20));
            const auto maj = segment(rec, spec);
            spec.label_policy = LabelPolicy::pure_only;
            const auto pure = segment(rec, spec);
            std::set<std::size_t> maj_idx;
            for (const auto& s : maj) maj_idx.insert(s.window_index);
            for (const auto& s : pure) {
                CHECK(maj_idx.count(s.window_index) == 1);
                CHECK(s.label == maj[s.window_index].label);
            }
        }
    }
}
