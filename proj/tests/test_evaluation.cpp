#include <doctest.h>

#include "gridsec/evaluation.hpp"

using namespace gridsec;

namespace {

// the published 118-bus confusion matrix (rows/cols: alarm, emergency1,
// emergency2, normal)
ConfusionMatrix published_matrix() {
    ConfusionMatrix m;
    m.counts = {{{947, 1, 0, 0}, {4, 279, 5, 0}, {0, 4, 252, 0}, {2, 0, 0, 225}}};
    return m;
}

}  // namespace

TEST_CASE("published confusion matrix reproduces the reported metrics") {
    ConfusionMatrix m = published_matrix();
    CHECK(m.total() == 1719);
    // frozen from exact rational arithmetic: O = 1703/1719,
    // E = 1102103/1719^2, k = (O-E)/(1-E)
    CHECK(accuracy(m) * 100.0 == doctest::Approx(99.06922629435718).epsilon(1e-12));
    CHECK(kappa(m) * 100.0 == doctest::Approx(98.51559050936444).epsilon(1e-12));
    // against the reported rounded values, within 0.01 pp
    CHECK(accuracy(m) * 100.0 == doctest::Approx(99.07).epsilon(2e-4));
    CHECK(kappa(m) * 100.0 == doctest::Approx(98.52).epsilon(2e-4));

    auto errors = per_class_error(m);
    CHECK(errors[0] == doctest::Approx(1.0 / 948.0).epsilon(1e-12));   // alarm ~ 0.00
    CHECK(errors[1] == doctest::Approx(9.0 / 288.0).epsilon(1e-12));   // emerg1 ~ 0.03
    CHECK(errors[2] == doctest::Approx(4.0 / 256.0).epsilon(1e-12));   // emerg2 ~ 0.02
    CHECK(errors[3] == doctest::Approx(2.0 / 227.0).epsilon(1e-12));   // normal ~ 0.01
}

TEST_CASE("confusion matrix construction") {
    using SC = SecurityClass;
    SUBCASE("perfect predictions are diagonal") {
        std::vector<SC> t = {SC::Normal, SC::Alarm, SC::Emergency1, SC::Emergency2, SC::Alarm};
        ConfusionMatrix m = confusion_matrix(t, t);
        CHECK(m.trace() == 5);
        CHECK(accuracy(m) == doctest::Approx(1.0));
        CHECK(kappa(m) == doctest::Approx(1.0));
    }
    SUBCASE("single sample") {
        ConfusionMatrix m = confusion_matrix({SC::Normal}, {SC::Normal});
        CHECK(m.total() == 1);
        CHECK(m.counts[3][3] == 1);
    }
    SUBCASE("rows are actual, columns are predicted") {
        ConfusionMatrix m = confusion_matrix({SC::Alarm}, {SC::Emergency2});
        CHECK(m.counts[ConfusionMatrix::matrix_index(SC::Emergency2)][ConfusionMatrix::matrix_index(SC::Alarm)] == 1);
    }
    SUBCASE("length mismatch throws") {
        CHECK_THROWS_AS(confusion_matrix({SC::Normal}, {SC::Normal, SC::Alarm}), std::invalid_argument);
    }
    SUBCASE("row sums equal true class frequencies") {
        std::vector<SC> truth = {SC::Alarm, SC::Alarm, SC::Normal, SC::Emergency1};
        std::vector<SC> pred = {SC::Normal, SC::Alarm, SC::Alarm, SC::Emergency2};
        ConfusionMatrix m = confusion_matrix(pred, truth);
        CHECK(m.total() == 4);
        CHECK(m.row_total(ConfusionMatrix::matrix_index(SC::Alarm)) == 2);
        CHECK(m.row_total(ConfusionMatrix::matrix_index(SC::Normal)) == 1);
    }
}

TEST_CASE("kappa properties") {
    SUBCASE("chance-level agreement gives zero") {
        ConfusionMatrix m;
        m.counts = {{{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}};
        // O = 0.5, E = (2*2 + 2*2)/16 = 0.5
        CHECK(kappa(m) == doctest::Approx(0.0));
    }
    SUBCASE("zero diagonal") {
        ConfusionMatrix m;
        m.counts = {{{0, 5, 0, 0}, {5, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}};
        CHECK(accuracy(m) == doctest::Approx(0.0));
        CHECK(kappa(m) < 0.0);
    }
    SUBCASE("degenerate single-class data is undefined") {
        ConfusionMatrix m;
        m.counts[0][0] = 10;
        CHECK_THROWS_AS(kappa(m), std::domain_error);
    }
    SUBCASE("kappa never exceeds accuracy for imperfect predictions with 0 < E < 1") {
        ConfusionMatrix m = published_matrix();
        CHECK(kappa(m) <= accuracy(m));
        CHECK(kappa(m) < 1.0);
    }
    SUBCASE("kappa = 1 iff diagonal") {
        ConfusionMatrix m;
        m.counts[0][0] = 3;
        m.counts[1][1] = 4;
        m.counts[3][3] = 2;
        CHECK(kappa(m) == doctest::Approx(1.0));
        m.counts[0][1] = 1;
        CHECK(kappa(m) < 1.0);
    }
}

TEST_CASE("metrics are invariant under simultaneous row/column permutation") {
    ConfusionMatrix m = published_matrix();
    // permute class order (reverse) in both axes
    ConfusionMatrix p;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            p.counts[static_cast<std::size_t>(3 - r)][static_cast<std::size_t>(3 - c)] =
                m.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    CHECK(accuracy(p) == doctest::Approx(accuracy(m)).epsilon(1e-15));
    CHECK(kappa(p) == doctest::Approx(kappa(m)).epsilon(1e-15));
}

TEST_CASE("per-class error handles empty rows") {
    ConfusionMatrix m;
    m.counts[0][0] = 10;
    m.counts[1][1] = 5;
    auto errors = per_class_error(m);
    CHECK(errors[0] == doctest::Approx(0.0));
    CHECK(errors[2] == doctest::Approx(-1.0));  // not applicable
}

TEST_CASE("report formatting carries two-decimal percents") {
    using SC = SecurityClass;
    std::vector<SC> t = {SC::Normal, SC::Alarm, SC::Alarm, SC::Emergency1};
    EvaluationReport rep = evaluate(t, t);
    const std::string text = format_report(rep);
    CHECK(text.find("accuracy 100.00%") != std::string::npos);
    CHECK(text.find("kappa 100.00%") != std::string::npos);
    CHECK(text.find("alarm") != std::string::npos);
}
