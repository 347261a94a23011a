#include "doctest.h"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "emgpr/error.hpp"
#include "emgpr/features.hpp"
#include "oracles.hpp"

using namespace emgpr;
using V = std::vector<double>;

TEST_CASE("mav") {
    CHECK(mav(V{1, -1, 1, -1}) == 1.0);
    CHECK(mav(V{0, 0, 0, 0}) == 0.0);
    const V x{0.5, -0.25, 0.75};
    CHECK(oracle::mav(x) == doctest::Approx(0.5));
    CHECK(mav(x) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("mavs splits at floor(M/2)") {
    CHECK(mavs(V{1, 1, 1, 1}) == 0.0);
    CHECK(oracle::mavs(V{0, 0, 2, 2}) == 2.0);
    CHECK(mavs(V{0, 0, 2, 2}) == 2.0);
    CHECK(mavs(V{2, 2, 0, 0}) == -2.0);
    // odd length: first half has one sample, second half two
    CHECK(mavs(V{3, 1, 1}) == doctest::Approx(1.0 - 3.0));
}

TEST_CASE("wl") {
    CHECK(oracle::wl(V{1, -1, 1, -1}) == 6.0);
    CHECK(wl(V{1, -1, 1, -1}) == 6.0);
    CHECK(wl(V{4, 4, 4}) == 0.0);
    CHECK(wl(V{0, 1, 2, 3}) == 3.0);
}

TEST_CASE("zc") {
    CHECK(zc(V{1, -1, 1, -1}) == 3);
    CHECK(zc(V{1, 2, 3}) == 0);
    CHECK(oracle::zc(V{0.1, -0.1, 0.1}, 0.5) == 0);
    CHECK(zc(V{0.1, -0.1, 0.1}, 0.5) == 0);
    CHECK(zc(V{0.1, -0.1, 0.1}, 0.2) == 2);
    // touching zero is not a crossing
    CHECK(zc(V{1, 0, -1}) == 0);
}

TEST_CASE("ssc") {
    CHECK(oracle::ssc(V{0, 1, 0, 1, 0}, 0) == 3);
    CHECK(ssc(V{0, 1, 0, 1, 0}) == 3);
    CHECK(ssc(V{0, 1, 2, 3}) == 0);
    CHECK(ssc(V{0, 2, 0}, 5.0) == 0);
    CHECK(ssc(V{0, 2, 0}, 4.0) == 1);
    // plateau is not a strict extremum
    CHECK(ssc(V{0, 1, 1, 0}) == 0);
}

TEST_CASE("rms") {
    CHECK(oracle::rms(V{3, 4}) == doctest::Approx(3.5355339059327378));
    CHECK(rms(V{3, 4}) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
    CHECK(rms(V{-2.5, -2.5, -2.5}) == 2.5);
    CHECK(rms(V{0, 0, 0}) == 0.0);
}

TEST_CASE("hist") {
    SUBCASE("constant window fills the centre bin") {
        const V x(64, 0.7);
        const auto h = hist(x, 20, 3.0);
        CHECK(h[10] == 64.0);
        CHECK(std::accumulate(h.begin(), h.end(), 0.0) == 64.0);
    }
    SUBCASE("edge assignment") {
        CHECK(oracle::hist(V{-1, 1}, 2, 3.0) == V{1, 1});
        CHECK(hist(V{-1, 1}, 2, 3.0) == V{1, 1});
    }
    SUBCASE("out of range samples clamp to the end bins") {
        // sigma of {-10, 0, 0, 0, 10} is sqrt(40); span 1 puts +-10 outside
        const auto h = hist(V{-10, 0, 0, 0, 10}, 3, 1.0);
        CHECK(h == V{1, 3, 1});
    }
    SUBCASE("counts sum to M") {
        Rng rng(3);
        for (int t = 0; t < 50; ++t) {
            const auto x = oracle::random_window(rng, 2 + rng.below(300));
            const auto h = hist(x, 20, 3.0);
            CHECK(std::accumulate(h.begin(), h.end(), 0.0) == static_cast<double>(x.size()));
        }
    }
}

TEST_CASE("feature errors") {
    CHECK_THROWS_AS(mav(V{1.0}), InputTooShortError);
    CHECK_THROWS_AS(hist(V{}, 20, 3.0), InputTooShortError);
    CHECK_THROWS_AS(rms(V{1.0, NAN}), DataError);
    CHECK_THROWS_AS(wl(V{1.0, INFINITY}), DataError);
    CHECK_THROWS_AS(FeatureParams{.hist_bins = 0}.validate(), ValidationError);
    CHECK_THROWS_AS(FeatureParams{.zc_threshold = -1}.validate(), ValidationError);
}


TEST_SUITE("invariants") {
    TEST_CASE("features agree with brute-force references") {
        Rng rng(20240611);
        for (int t = 0; t < 1000; ++t) {
            const auto x = oracle::random_window(rng, 2 + rng.below(1023));
            const double thr = t % 3 == 0 ? 0.0 : rng.uniform(0, 0.5) * oracle::mav(x);
            CHECK(oracle::rel_err(mav(x), oracle::mav(x), 0) < 1e-9);
            CHECK(oracle::rel_err(mavs(x), oracle::mavs(x), oracle::mav(x)) < 1e-9);
            CHECK(oracle::rel_err(wl(x), oracle::wl(x), 0) < 1e-9);
            CHECK(oracle::rel_err(rms(x), oracle::rms(x), 0) < 1e-9);
            CHECK(zc(x, thr) == oracle::zc(x, thr));
            CHECK(ssc(x, thr * thr) == oracle::ssc(x, thr * thr));
            CHECK(hist(x, 20, 3.0) == oracle::hist(x, 20, 3.0));
        }
    }

    TEST_CASE("positive scaling") {
        Rng rng(11);
        for (int t = 0; t < 100; ++t) {
            auto x = oracle::random_window(rng, 2 + rng.below(500));
            // powers of two scale exactly
            const double a = std::ldexp(1.0, static_cast<int>(rng.below(20)) - 10);
            V y(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i];
            CHECK(mav(y) == a * mav(x));
            CHECK(wl(y) == a * wl(x));
            CHECK(rms(y) == a * rms(x));
            CHECK(zc(y) == zc(x));
            CHECK(ssc(y) == ssc(x));
            CHECK(hist(y, 20, 3.0) == hist(x, 20, 3.0));
        }
    }

    TEST_CASE("bounds") {
        Rng rng(5);
        for (int t = 0; t < 200; ++t) {
            const auto x = oracle::random_window(rng, 2 + rng.below(200));
            const auto m = x.size();
            CHECK(rms(x) >= mav(x) * (1 - 1e-12));
            CHECK(zc(x) <= m - 1);
            CHECK(ssc(x) <= m - 2);
        }
        // equality when |x| is constant
        CHECK(rms(V{2, -2, 2, 2}) == mav(V{2, -2, 2, 2}));
    }
}

namespace {

Segment make_segment(std::size_t channels, std::size_t length, std::uint64_t seed, int label = 1) {
    Segment s;
    s.num_channels = channels;
    s.length = length;
    s.label = label;
    s.repetition = 1;
    Rng rng(seed);
    s.samples.resize(channels * length);
    for (auto& v : s.samples) v = rng.normal();
    return s;
}

} // namespace

TEST_CASE("presets") {
    CHECK(feature_preset("C1").describe() == "MAV MAVS WL SSC ZC HIST RMS");
    CHECK(feature_preset("C2").describe() == "RMS");
    CHECK(feature_preset("C3").describe() == "WL");
    CHECK(feature_preset("C4").describe() == "WL RMS");
    CHECK(feature_preset("C5").describe() == "WL ZC RMS");
    CHECK(feature_preset("C6").describe() == "WL SSC");
    CHECK(feature_preset("C7").describe() == "MAV MAVS WL SSC ZC RMS");
    CHECK_THROWS_AS(feature_preset("C8"), ValidationError);
    CHECK_THROWS_AS(FeatureConfig("empty", {}), ValidationError);

    const auto custom = parse_feature_config("RMS,WL");
    CHECK(custom.kinds() == std::vector{FeatureKind::WL, FeatureKind::RMS});
}

TEST_CASE("row length") {
    CHECK(feature_preset("C1").row_length(12) == 312);
    CHECK(feature_preset("C2").row_length(12) == 12);
    CHECK(feature_preset("C7").row_length(1) == 6);
}

TEST_CASE("extract layout is channel-major in canonical kind order") {
    const auto seg = make_segment(3, 64, 1);
    const auto cfg = feature_preset("C4");
    const auto row = extract(seg, cfg);
    REQUIRE(row.size() == 6);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(row[2 * c] == wl(seg.channel(c)));
        CHECK(row[2 * c + 1] == rms(seg.channel(c)));
    }
    const auto meta = cfg.column_meta(3);
    CHECK(meta[3].name() == "ch2_RMS");
    const auto c1 = feature_preset("C1").column_meta(1);
    CHECK(c1[5].name() == "ch1_HIST_0");
    CHECK(c1[24].name() == "ch1_HIST_19");
    CHECK(c1[25].name() == "ch1_RMS");
}

TEST_CASE("build_matrix") {
    std::vector<Segment> segs;
    for (int i = 0; i < 25; ++i) segs.push_back(make_segment(12, 64, 100 + i, i % 3));
    const auto fm = build_matrix(segs, feature_preset("C1"), 4);
    CHECK(fm.rows() == 25);
    CHECK(fm.cols() == 312);
    CHECK(fm.subject_id == 4);
    for (std::size_t t = 0; t < segs.size(); ++t) {
        CHECK(fm.labels[t] == segs[t].label);
    }
    const auto one = build_matrix(std::span(segs).first(1), feature_preset("C3"));
    CHECK(one.rows() == 1);
    CHECK(one.cols() == 12);
    CHECK_THROWS_AS(build_matrix(std::span<const Segment>{}, feature_preset("C3")), DataError);

    // same inputs, same layout and values
    CHECK(build_matrix(segs, feature_preset("C1"), 4) == fm);
}

TEST_CASE("extract reports channel and kind on failure") {
    auto seg = make_segment(2, 16, 9);
    seg.samples[16 + 3] = NAN;
    try {
        (void)extract(seg, feature_preset("C3"));
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("channel 2, WL") != std::string::npos);
    }
}

TEST_CASE("feature matrix CSV reloads bit-identically") {
    std::vector<Segment> segs;
    for (int i = 0; i < 7; ++i) segs.push_back(make_segment(2, 40, 7 + i, i));
    const auto fm = build_matrix(segs, feature_preset("C1"), 3);
    std::stringstream ss;
    write_feature_matrix(ss, fm);
    const auto back = read_feature_matrix(ss, 3);
    CHECK(back == fm);
}
