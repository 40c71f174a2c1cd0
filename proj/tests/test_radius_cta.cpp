#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "certirad/radius_cta.hpp"
#include "oracles.hpp"

using namespace certirad::cta;
using certirad::bounds::ConfidenceLevel;
using certirad::bounds::MarginEstimate;

namespace {

MarginEstimate margin_of(double v) {
    MarginEstimate m;
    m.value = v;
    return m;
}

}  // namespace

TEST_CASE("first radius") {
    CHECK(radius_first(margin_of(0.0), 1.0, true).value == 0.0);
    CHECK(radius_first(margin_of(1.0), 1.0 / std::sqrt(2.0), true).value ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(radius_first(margin_of(0.9), 1.0, false).value == 0.0);
    CHECK(radius_first(margin_of(-0.5), 1.0, true).value == 0.0);
    CHECK_THROWS_AS(radius_first(margin_of(0.5), 0.0, true), std::invalid_argument);
}

TEST_CASE("second radius") {
    CHECK(radius_second(margin_of(2.0), 0.5, true).value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(radius_second(margin_of(-1.0), 0.5, true).value == 0.0);
    CHECK(radius_second(margin_of(2.0), 1.0, true).value ==
          doctest::Approx(2.0 * radius_second(margin_of(2.0), 0.5, true).value).epsilon(1e-15));
    CHECK(radius_second(margin_of(3.0), 0.5, false).value == 0.0);
    CHECK_THROWS_AS(radius_second(margin_of(0.5), -1.0, true), std::invalid_argument);
}

TEST_CASE("radii are monotone in the margin") {
    oracle::Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.uniform(-1.0, 1.0), d = rng.uniform(0.0, 0.5);
        CHECK(radius_first(margin_of(a + d), 2.0, true).value >=
              radius_first(margin_of(a), 2.0, true).value);
        CHECK(radius_second(margin_of(a + d), 0.7, true).value >=
              radius_second(margin_of(a), 0.7, true).value);
    }
}

TEST_CASE("cta curve counting") {
    std::vector<CertifiedRadius> recs;
    for (double v : {0.1, 0.2, 0.3, 0.4, 0.5}) {
        CertifiedRadius r;
        r.value = v;
        r.correct = true;
        recs.push_back(r);
    }
    std::vector<double> grid{0.25};
    const auto curve = cta_curve(recs, grid, ConfidenceLevel(0.05));
    // radii 0.3, 0.4, 0.5 strictly exceed 0.25
    CHECK(curve.approx_acc[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(curve.lcb_acc[0] ==
          doctest::Approx(certirad::bounds::clopper_pearson_lower(3, 5, ConfidenceLevel(0.05)))
              .epsilon(1e-15));

    // all-zero radii give a flat zero curve
    std::vector<CertifiedRadius> zeros(4);
    std::vector<double> g2{0.0, 0.5, 1.0};
    const auto flat = cta_curve(zeros, g2, ConfidenceLevel(0.05));
    for (double a : flat.approx_acc) CHECK(a == 0.0);
    for (double a : flat.lcb_acc) CHECK(a == 0.0);
}

TEST_CASE("cta curve properties") {
    oracle::Rng rng(7);
    std::vector<CertifiedRadius> recs;
    for (int i = 0; i < 200; ++i) {
        CertifiedRadius r;
        r.value = rng.uniform(0.0, 2.0);
        r.correct = rng.uniform() < 0.8;
        recs.push_back(r);
    }
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.1 * i);
    const auto curve = cta_curve(recs, grid, ConfidenceLevel(0.05));
    for (size_t i = 1; i < grid.size(); ++i) {
        CHECK(curve.approx_acc[i] <= curve.approx_acc[i - 1] + 1e-15);
        CHECK(curve.lcb_acc[i] <= curve.lcb_acc[i - 1] + 1e-12);
    }
    for (size_t i = 0; i < grid.size(); ++i) CHECK(curve.lcb_acc[i] <= curve.approx_acc[i] + 1e-15);

    CHECK_THROWS_AS(cta_curve({}, grid, ConfidenceLevel(0.05)), std::invalid_argument);
    std::vector<double> bad{0.5, 0.5};
    CHECK_THROWS_AS(cta_curve(recs, bad, ConfidenceLevel(0.05)), std::invalid_argument);
}

TEST_CASE("strict exceedance resolves ties conservatively") {
    CertifiedRadius r;
    r.value = 0.5;
    r.correct = true;
    std::vector<CertifiedRadius> recs{r};
    std::vector<double> grid{0.5};
    CHECK(cta_curve(recs, grid, ConfidenceLevel(0.05)).approx_acc[0] == 0.0);
}

TEST_CASE("gain table matches the published derived rows") {
    CtaCurve base, ours;
    base.grid = ours.grid = {0.5, 2.5, 3.0};
    base.approx_acc = {0.774, 0.582, 0.000};
    ours.approx_acc = {0.780, 0.614, 0.538};
    const auto gains = gain_table(base, ours);
    CHECK(gains[0] == doctest::Approx(0.78).epsilon(0.01));
    CHECK(gains[1] == doctest::Approx(5.50).epsilon(0.001));
    CHECK(std::isinf(gains[2]));
    CHECK(gains[2] > 0.0);

    CtaCurve both_zero = base;
    both_zero.approx_acc = {0.0, 0.0, 0.0};
    CtaCurve ours_zero = both_zero;
    CHECK(gain_table(both_zero, ours_zero)[2] == 0.0);

    CtaCurve mismatched = ours;
    mismatched.grid = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS(gain_table(base, mismatched), std::invalid_argument);
}
