#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mw/errors.hpp"
#include "mw/sufficiency.hpp"

using namespace mw;
using nlohmann::json;

namespace {

DomainDescriptor unit_line() {
    Window w;
    w.lo = {0.0};
    w.hi = {1.0};
    return DomainDescriptor::euclidean(1, w);
}

SetFamilySpec zero_anchored_family() {
    SetFamilySpec fam;
    fam.centers_per_axis = {3};
    fam.r_min = 0.05;
    fam.r_max = 0.45;
    fam.radius_count = 4;
    return fam;
}

QuadSpec fine_quad() {
    QuadSpec q;
    q.points_per_axis = 1000;
    q.grading_ratio = 1.005;
    return q;
}

GridLadder default_ladder() {
    GridLadder ladder;
    ladder.base.counts = {512};
    ladder.base.grading_ratio = 1.01;
    ladder.levels = 3;
    return ladder;
}

ScalarWeight scalar_power(double alpha) {
    const auto w = catalog_weight("scalar_power", json{{"alpha", alpha}}, unit_line());
    return diagonal_entry_weight(w, 0);
}

}  // namespace

TEST_CASE("scalar_muckenhoupt_constant: constant weight gives exactly 1") {
    const auto est = scalar_muckenhoupt_constant(constant_scalar_weight(unit_line()),
                                                 LebesgueExponent(2.0), zero_anchored_family(),
                                                 fine_quad());
    CHECK(est.c_hat == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : est.per_set) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scalar_muckenhoupt_constant: power-law closed form 1/(1-alpha^2)") {
    // oracle: exact integrals over zero-anchored intervals [0,b]:
    // avg(x^a) = b^a/(1+a), avg(x^{-a}) = b^{-a}/(1-a), product = 1/(1-a^2)
    for (double alpha : {-0.5, 0.0, 0.25, 0.5, 0.75}) {
        const auto est = scalar_muckenhoupt_constant(scalar_power(alpha), LebesgueExponent(2.0),
                                                     zero_anchored_family(), fine_quad());
        CHECK(est.c_hat == doctest::Approx(1.0 / (1.0 - alpha * alpha)).epsilon(0.02));
    }
    // w = |x|^{1/2}: per-set value 4/3 on every zero-anchored interval
    const auto est = scalar_muckenhoupt_constant(scalar_power(0.5), LebesgueExponent(2.0),
                                                 zero_anchored_family(), fine_quad());
    CHECK(est.c_hat == doctest::Approx(4.0 / 3.0).epsilon(0.005));
}

TEST_CASE("scalar_muckenhoupt_trend: alpha beyond p-1 diverges") {
    QuadSpec q;
    q.points_per_axis = 400;
    q.grading_ratio = 1.01;
    const auto trend = scalar_muckenhoupt_trend(scalar_power(1.5), LebesgueExponent(2.0),
                                                zero_anchored_family(), q, 3);
    CHECK(trend.divergence);
    CHECK(trend.slope > 0.1);

    const auto stable = scalar_muckenhoupt_trend(scalar_power(0.75), LebesgueExponent(2.0),
                                                 zero_anchored_family(), q, 3);
    CHECK_FALSE(stable.divergence);
    CHECK(stable.final_value() == doctest::Approx(1.0 / (1.0 - 0.75 * 0.75)).epsilon(0.02));
}

TEST_CASE("sufficient_ap_check: identity holds with unit constants") {
    const auto id = catalog_weight("identity", json{{"n", 2}}, unit_line());
    const auto report = sufficient_ap_check(id, LebesgueExponent(2.0), zero_anchored_family(),
                                            default_ladder(), fine_quad());
    CHECK(report.verdict == SufficiencyVerdict::SufficientConditionsHold);
    for (const auto& ci : report.condition_i) CHECK(ci.b_hat == doctest::Approx(1.0));
    for (const auto& cii : report.condition_ii)
        CHECK(cii.final_value() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sufficient_ap_check: in-range diagonal powers hold with 1/(1-a^2)") {
    const auto dp =
        catalog_weight("diag_power", json{{"alpha", {0.5, -0.5}}}, unit_line());
    const auto report = sufficient_ap_check(dp, LebesgueExponent(2.0), zero_anchored_family(),
                                            default_ladder(), fine_quad());
    CHECK(report.verdict == SufficiencyVerdict::SufficientConditionsHold);
    for (const auto& ci : report.condition_i)
        CHECK(ci.b_hat == doctest::Approx(1.0).epsilon(1e-9));
    for (const auto& cii : report.condition_ii)
        CHECK(cii.final_value() == doctest::Approx(4.0 / 3.0).epsilon(0.02));
}

TEST_CASE("sufficient_ap_check: diagonal reduction to scalar verdicts") {
    // second entry's exponent 1.5 > p - 1 fails condition (ii) only
    const auto dp =
        catalog_weight("diag_power", json{{"alpha", {0.5, 1.5}}}, unit_line());
    const auto report = sufficient_ap_check(dp, LebesgueExponent(2.0), zero_anchored_family(),
                                            default_ladder(), fine_quad());
    CHECK(report.verdict == SufficiencyVerdict::Indeterminate);
    for (const auto& ci : report.condition_i)
        CHECK(ci.verdict == EssSupVerdict::BoundedAtResolution);
    CHECK_FALSE(report.condition_ii[0].divergence);
    CHECK(report.condition_ii[1].divergence);
    REQUIRE(report.failed_checks.size() == 1);
    CHECK(report.failed_checks[0].find("condition (ii)") != std::string::npos);
    CHECK(report.failed_checks[0].find("k=2") != std::string::npos);
}

TEST_CASE("sufficient_ap_check: the example weight is Indeterminate via condition (i)") {
    const auto paper = catalog_weight("paper_example", json::object(), unit_line());
    const auto report = sufficient_ap_check(paper, LebesgueExponent(2.0),
                                            zero_anchored_family(), default_ladder(),
                                            fine_quad());
    CHECK(report.verdict == SufficiencyVerdict::Indeterminate);
    REQUIRE(report.condition_i.size() == 2);
    for (const auto& ci : report.condition_i) {
        CHECK(ci.verdict == EssSupVerdict::DivergenceSuspected);
        // squared criterion = 1 + 1/x: rate -1 for g^2, -1/2 for g
        CHECK(2.0 * ci.rate == doctest::Approx(-1.0).epsilon(0.1));
    }
    CHECK(report.failed_checks.size() >= 2);
}

TEST_CASE("non_necessity_demo: conditions fail, direct A_2 constant stays bounded") {
    QuadSpec q;
    q.points_per_axis = 900;
    q.grading_ratio = 1.004;
    const auto report = non_necessity_demo(zero_anchored_family(), default_ladder(), q, 3);
    CHECK(report.sufficiency.verdict == SufficiencyVerdict::Indeterminate);
    CHECK(report.within_bound);
    CHECK(report.a2_sup <= 1.634);
    // resolution-independent closed form: successive levels agree closely
    for (std::size_t i = 0; i + 1 < report.a2_values.size(); ++i)
        CHECK(report.a2_values[i + 1] ==
              doctest::Approx(report.a2_values[i]).epsilon(1e-3));
}

TEST_CASE("known-class soundness: a held verdict comes with a stable Roudenko trend") {
    QuadSpec q;
    q.points_per_axis = 80;
    const auto dp =
        catalog_weight("diag_power", json{{"alpha", {0.5, -0.5}}}, unit_line());
    const auto report = sufficient_ap_check(dp, LebesgueExponent(2.0), zero_anchored_family(),
                                            default_ladder(), fine_quad());
    REQUIRE(report.verdict == SufficiencyVerdict::SufficientConditionsHold);
    const auto trend = roudenko_trend(dp, LebesgueExponent(2.0), zero_anchored_family(), q, 3);
    CHECK_FALSE(trend.divergence);
}
