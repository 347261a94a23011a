#include "doctest.h"

#include <numeric>
#include <sstream>

#include "emgpr/error.hpp"
#include "emgpr/evaluation.hpp"
#include "emgpr/rng.hpp"

using namespace emgpr;
using L = std::vector<int>;

namespace {

EvalReport report(int subject, double acc, std::string clf = "knn") {
    EvalReport r;
    r.subject_id = subject;
    r.technique = "PROPOSED";
    r.config = "C1";
    r.classifier = std::move(clf);
    r.accuracy_pct = acc;
    return r;
}

} // namespace

TEST_CASE("accuracy") {
    CHECK(accuracy(L{1, 1, 2}, L{1, 2, 2}) == doctest::Approx(66.667).epsilon(1e-4));
    CHECK(accuracy(L{3, 4, 5}, L{3, 4, 5}) == 100.0);
    CHECK_THROWS_AS(accuracy(L{}, L{}), DataError);
    CHECK_THROWS_AS(accuracy(L{1}, L{1, 2}), ShapeError);
    CHECK(format_pct(66.66666666) == "66.6667");
}

TEST_CASE("uniform random predictions land near chance") {
    Rng rng(2024);
    L p(10000), t(10000);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = 1 + static_cast<int>(rng.below(17));
        t[i] = 1 + static_cast<int>(rng.below(17));
    }
    const double acc = accuracy(p, t);
    CHECK(acc >= 4.5);
    CHECK(acc <= 7.5);
}

TEST_CASE("confusion") {
    const L classes{1, 2, 3};
    SUBCASE("perfect is diagonal") {
        const auto cm = confusion(L{1, 2, 3, 3}, L{1, 2, 3, 3}, classes);
        CHECK(cm.counts == std::vector<std::size_t>{1, 0, 0, 0, 1, 0, 0, 0, 2});
    }
    SUBCASE("swap is antidiagonal") {
        const auto cm = confusion(L{1, 2}, L{2, 1}, L{1, 2});
        CHECK(cm.counts == std::vector<std::size_t>{0, 1, 1, 0});
    }
    SUBCASE("hand count") {
        // truth:     1 1 1 2 2 3 3 3
        // predicted: 1 2 1 2 3 3 1 3
        const auto cm = confusion(L{1, 2, 1, 2, 3, 3, 1, 3}, L{1, 1, 1, 2, 2, 3, 3, 3}, classes);
        CHECK(cm.at(0, 0) == 2);
        CHECK(cm.at(0, 1) == 1);
        CHECK(cm.at(1, 1) == 1);
        CHECK(cm.at(1, 2) == 1);
        CHECK(cm.at(2, 0) == 1);
        CHECK(cm.at(2, 2) == 2);
        CHECK(cm.total() == 8);
        CHECK(cm.trace() == 5);
        const auto per = cm.per_class_accuracy();
        CHECK(per[0] == doctest::Approx(200.0 / 3));
        CHECK(per[1] == 50.0);
        std::ostringstream csv;
        write_confusion_csv(csv, cm);
        CHECK(csv.str() == "truth\\predicted,1,2,3\n1,2,1,0\n2,0,1,1\n3,1,0,2\n");
    }
    SUBCASE("unknown label") {
        CHECK_THROWS_AS(confusion(L{4}, L{1}, classes), LabelError);
    }
}

TEST_CASE("trial vote") {
    // two trials of class 1 (reps 1, 2) and one of class 2
    const L truth{1, 1, 1, 1, 1, 2, 2, 2};
    const L reps{1, 1, 1, 2, 2, 1, 1, 1};
    const L pred{1, 2, 1, 2, 3, 2, 1, 1};
    const auto voted = vote_per_trial(pred, truth, reps);
    CHECK(voted == L{1, 1, 1, 2, 2, 1, 1, 1});
}

TEST_CASE("report and CSV") {
    const auto r = make_report(3, "AG", "C4", "nb", L{1, 2, 2}, L{1, 2, 1}, L{1, 2}, 10);
    CHECK(r.accuracy_pct == doctest::Approx(66.6666667));
    CHECK(r.n_test == 3);
    CHECK(r.n_train == 10);
    std::ostringstream out;
    const std::vector<EvalReport> rs{r};
    write_report_csv(out, rs);
    CHECK(out.str() == "subject,technique,config,classifier,accuracy_pct,n_train,n_test\n"
                       "3,AG,C4,nb,66.6667,10,3\n");
}

TEST_CASE("group averages") {
    SUBCASE("forty subjects make four groups") {
        std::vector<EvalReport> rs;
        for (int s = 1; s <= 40; ++s) rs.push_back(report(s, 90));
        const auto g = group_average(rs, 10);
        REQUIRE(g.groups.size() == 4);
        CHECK(g.groups[3].first_subject == 31);
        CHECK(g.groups[3].last_subject == 40);
        CHECK(g.entries.size() == 4);
        for (const auto& e : g.entries) CHECK(e.mean_accuracy_pct == 90.0);
    }
    SUBCASE("remainder group") {
        std::vector<EvalReport> rs;
        for (int s = 11; s >= 1; --s) rs.push_back(report(s, 50));
        const auto g = group_average(rs, 10);
        REQUIRE(g.groups.size() == 2);
        CHECK(g.groups[0].first_subject == 1);
        CHECK(g.groups[0].last_subject == 10);
        CHECK(g.groups[1].subjects == L{11});
    }
    SUBCASE("mean within a group") {
        const std::vector<EvalReport> rs{report(1, 90), report(2, 80), report(1, 70, "dt")};
        const auto g = group_average(rs, 10);
        REQUIRE(g.entries.size() == 2);
        for (const auto& e : g.entries) {
            if (e.classifier == "knn") {
                CHECK(e.mean_accuracy_pct == 85.0);
                CHECK(e.n_subjects == 2);
            } else {
                CHECK(e.mean_accuracy_pct == 70.0);
            }
        }
    }
    CHECK_THROWS_AS(group_average(std::vector<EvalReport>{}, 10), DataError);
    CHECK_THROWS_AS(group_average(std::vector<EvalReport>{report(1, 1)}, 0), ValidationError);
}

TEST_SUITE("invariants") {
    TEST_CASE("accuracy equals the confusion trace ratio") {
        Rng rng(40);
        for (int t = 0; t < 100; ++t) {
            const int k = 2 + static_cast<int>(rng.below(10));
            const std::size_t n = 1 + rng.below(500);
            L p(n), y(n), classes(static_cast<std::size_t>(k));
            std::iota(classes.begin(), classes.end(), 1);
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
                y[i] = rng.below(3) == 0 ? p[i] : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
            }
            const auto cm = confusion(p, y, classes);
            CHECK(cm.total() == n);
            CHECK(accuracy(p, y) == doctest::Approx(cm.accuracy_pct()).epsilon(1e-12));

            // permuting rows changes nothing
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(order.begin(), order.end());
            L pp(n), yy(n);
            for (std::size_t i = 0; i < n; ++i) {
                pp[i] = p[order[i]];
                yy[i] = y[order[i]];
            }
            CHECK(accuracy(pp, yy) == accuracy(p, y));
            CHECK(confusion(pp, yy, classes) == cm);
        }
    }

    TEST_CASE("group average of identical reports is that accuracy") {
        std::vector<EvalReport> rs;
        for (int s = 1; s <= 23; ++s) rs.push_back(report(s, 87.125));
        for (const auto& e : group_average(rs, 7).entries) CHECK(e.mean_accuracy_pct == 87.125);
    }
}
