#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mw/errors.hpp"
#include "mw/numerics.hpp"
#include "mw/projection.hpp"

using namespace mw;
using nlohmann::json;

namespace {

DomainDescriptor unit_line() {
    Window w;
    w.lo = {0.0};
    w.hi = {1.0};
    return DomainDescriptor::euclidean(1, w);
}

GridLadder default_ladder(int base = 512, double sigma = 1.01) {
    GridLadder ladder;
    ladder.base.counts = {base};
    ladder.base.grading_ratio = sigma;
    ladder.levels = 3;
    return ladder;
}

MatrixWeight diag_one_xsq() {
    // W = diag(1, x^2) on (0, 1]
    return catalog_weight("diag_power", json{{"alpha", {0.0, 2.0}}}, unit_line());
}

}  // namespace

TEST_CASE("direction fields: unit norm, normalization, determinism") {
    const auto e2 = coordinate_direction(3, 1);
    CHECK(e2.evaluate({0.5})[1] == Complex(1.0, 0.0));

    const auto custom = custom_direction(2, "diag", [](const Point&) {
        CVector v(2);
        v << Complex(3.0, 0.0), Complex(0.0, 4.0);
        return v;  // normalized on input
    });
    const CVector v = custom.evaluate({0.1});
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(v[0]) == doctest::Approx(0.6).epsilon(1e-14));

    const auto paper = catalog_weight("paper_example", json::object(), unit_line());
    const auto v1 = eigenvector_direction(paper, 0);
    const CVector a = v1.evaluate({0.3});
    const CVector b = v1.evaluate({0.3});
    CHECK((a - b).norm() == 0.0);  // deterministic branch and phase
    CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(DirectionField(2, "bad",
                                   [](const Point&) {
                                       CVector v(2);
                                       v << 2.0, 0.0;
                                       return v;
                                   })
                        .evaluate({0.5}),
                    ShapeMismatchError);
}

TEST_CASE("projection_bound: identity weight is bounded with B_hat = 1") {
    const auto id = catalog_weight("identity", json{{"n", 2}}, unit_line());
    const auto w1 = constant_scalar_weight(unit_line());
    const auto est = projection_bound(id, w1, LebesgueExponent(2.0), coordinate_direction(2, 0),
                                      default_ladder(128));
    CHECK(est.verdict == EssSupVerdict::BoundedAtResolution);
    CHECK(est.b_hat == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projection_bound: diag(1, x^2) against e_2 diverges at rate -1") {
    const auto w = diag_one_xsq();
    const auto est = projection_bound(w, constant_scalar_weight(unit_line()),
                                      LebesgueExponent(2.0), coordinate_direction(2, 1),
                                      default_ladder());
    CHECK(est.verdict == EssSupVerdict::DivergenceSuspected);
    CHECK(est.rate == doctest::Approx(-1.0).epsilon(0.1));
    // oracle: g(x) = 1/x at the probe points
    for (const auto& [x, g] : est.profile)
        if (x > 1e-6) CHECK(g == doctest::Approx(1.0 / x).epsilon(1e-9));
}

TEST_CASE("projection_bound: paper example with w = w11 and r = e1") {
    const auto paper = catalog_weight("paper_example", json::object(), unit_line());
    const auto w11 = diagonal_entry_weight(paper, 0);
    const auto est = projection_bound(paper, w11, LebesgueExponent(2.0),
                                      coordinate_direction(2, 0), default_ladder());
    CHECK(est.verdict == EssSupVerdict::DivergenceSuspected);
    // g^2 = 1 + 1/x so g ~ x^{-1/2}
    CHECK(est.rate == doctest::Approx(-0.5).epsilon(0.1));
    // eigendecomposition noise grows with the condition number ~ 1/x
    for (const auto& [x, g] : est.profile) {
        const double tol = x > 1e-6 ? 1e-9 : 1e-4;
        CHECK(g * g == doctest::Approx(1.0 + 1.0 / x).epsilon(tol));
    }
}

TEST_CASE("coordinate_projection_bound: identity and diagonal weights") {
    const auto id = catalog_weight("identity", json{{"n", 2}}, unit_line());
    for (auto target : {CoordinateTarget::EntryOfW, CoordinateTarget::EntryOfPowerTarget}) {
        const auto est =
            coordinate_projection_bound(id, LebesgueExponent(2.0), 0, target, default_ladder(128));
        CHECK(est.verdict == EssSupVerdict::BoundedAtResolution);
        CHECK(est.b_hat == doctest::Approx(1.0).epsilon(1e-12));
    }

    // diagonal weights commute with their powers: criterion is exactly 1
    const auto dp = catalog_weight("diag_power", json{{"alpha", {0.7, -0.3}}}, unit_line());
    for (double pval : {1.5, 2.0, 3.0}) {
        for (auto target : {CoordinateTarget::EntryOfW, CoordinateTarget::EntryOfPowerTarget}) {
            const auto est = coordinate_projection_bound(dp, LebesgueExponent(pval), 1, target,
                                                         default_ladder(128));
            CHECK(est.b_hat == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(est.verdict == EssSupVerdict::BoundedAtResolution);
        }
    }
}

TEST_CASE("coordinate_projection_bound: paper entry criterion diverges") {
    const auto paper = catalog_weight("paper_example", json::object(), unit_line());
    const auto est = coordinate_projection_bound(paper, LebesgueExponent(2.0), 0,
                                                 CoordinateTarget::EntryOfW, default_ladder());
    CHECK(est.verdict == EssSupVerdict::DivergenceSuspected);
    for (const auto& [x, g] : est.profile) {
        const double tol = x > 1e-6 ? 1e-9 : 1e-4;
        CHECK(g * g == doctest::Approx(1.0 + 1.0 / x).epsilon(tol));
    }
}

TEST_CASE("criterion equivalence: coordinate reduction equals the general bound") {
    const auto paper = catalog_weight("paper_example", json::object(), unit_line());
    const LebesgueExponent p2(2.0);
    const auto ladder = default_ladder(256);
    for (int k : {0, 1}) {
        const auto coord =
            coordinate_projection_bound(paper, p2, k, CoordinateTarget::EntryOfW, ladder);
        const auto general = projection_bound(paper, diagonal_entry_weight(paper, k), p2,
                                              coordinate_direction(2, k), ladder);
        REQUIRE(coord.profile.size() == general.profile.size());
        for (std::size_t i = 0; i < coord.profile.size(); ++i) {
            CHECK(coord.profile[i].first == general.profile[i].first);
            CHECK(coord.profile[i].second ==
                  doctest::Approx(general.profile[i].second).epsilon(1e-11));
        }
        CHECK(coord.b_hat == doctest::Approx(general.b_hat).epsilon(1e-11));
    }
}

TEST_CASE("eigen_projection_check: identity on random PD weights and the example grid") {
    auto rng = seeded_rng(2024);
    std::normal_distribution<double> g;
    GridSpec spec;
    spec.counts = {16};
    const SampleGrid grid = build_grid(unit_line(), spec);

    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 5;
        CMatrix a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
        const CMatrix pd = a * a.adjoint() + 0.05 * CMatrix::Identity(n, n);
        const MatrixWeight w(unit_line(), n, "random_pd",
                             [pd](const Point&) { return pd; });
        const double pval = (trial % 3 == 0) ? 1.5 : (trial % 3 == 1 ? 2.0 : 3.0);
        const int branch = trial % n;
        const auto rep = eigen_projection_check(w, LebesgueExponent(pval), branch, grid);
        CHECK(rep.max_deviation <= 1e-10);
    }

    const auto paper = catalog_weight("paper_example", json::object(), unit_line());
    GridSpec graded;
    graded.counts = {512};
    graded.axis_singular = {{0.0}};
    graded.grading_ratio = 1.01;
    const SampleGrid pg = build_grid(unit_line(), graded);
    for (int i : {0, 1}) {
        const auto rep = eigen_projection_check(paper, LebesgueExponent(2.0), i, pg);
        CHECK(rep.max_deviation <= 1e-9);
        CHECK(rep.flagged == 0);
    }

    // identity: degenerate spectrum everywhere, all points flagged
    const auto id = catalog_weight("identity", json{{"n", 3}}, unit_line());
    const auto rep = eigen_projection_check(id, LebesgueExponent(2.0), 1, grid);
    CHECK(rep.checked == 0);
    CHECK(rep.flagged == grid.size());
    CHECK(rep.max_deviation == 0.0);
}

TEST_CASE("generate_witness: identity collapses to the bare bump") {
    const auto id = catalog_weight("identity", json{{"n", 2}}, unit_line());
    const auto w1 = constant_scalar_weight(unit_line());
    GridSpec spec;
    spec.counts = {4096};
    const SampleGrid grid = build_grid(unit_line(), spec);
    const LebesgueExponent p2(2.0);
    const auto fam = generate_witness(id, w1, p2, coordinate_direction(2, 0), {0.5},
                                      {0.05, 0.02}, grid);
    REQUIRE(fam.functions.size() == 2);
    // f_eps = phi_eps^{1/p} e_1
    for (std::size_t j = 0; j < grid.size(); j += 97) {
        const double x = grid.points[j][0];
        const double dist = std::abs(x - 0.5);
        const double phi = dist < 0.05 ? (1.0 - dist / 0.05) / 0.05 : 0.0;
        CHECK(std::abs(fam.functions[0][j][0]) ==
              doctest::Approx(std::sqrt(phi)).epsilon(1e-12));
        CHECK(std::abs(fam.functions[0][j][1]) == 0.0);
    }
    for (double nrm : fam.lp_norms) CHECK(nrm == doctest::Approx(1.0).epsilon(0.02));

    CHECK_THROWS_AS(generate_witness(id, w1, p2, coordinate_direction(2, 0), {0.01}, {0.05},
                                     grid),
                    SupportOverflowError);
}

TEST_CASE("witness norms are unit within 2% on catalog cases") {
    GridSpec spec;
    spec.counts = {4096};
    spec.axis_singular = {{0.0}};
    spec.grading_ratio = 1.002;
    const SampleGrid grid = build_grid(unit_line(), spec);
    const LebesgueExponent p2(2.0);
    const auto w1 = constant_scalar_weight(unit_line());

    const auto dx = diag_one_xsq();
    const auto fam = generate_witness(dx, w1, p2, coordinate_direction(2, 1), {0.1},
                                      {0.02, 0.01, 0.005}, grid);
    for (double nrm : fam.lp_norms) CHECK(nrm == doctest::Approx(1.0).epsilon(0.02));

    const auto paper = catalog_weight("paper_example", json::object(), unit_line());
    const auto fam2 = generate_witness(paper, diagonal_entry_weight(paper, 0), p2,
                                       coordinate_direction(2, 0), {0.3}, {0.05, 0.01}, grid);
    for (double nrm : fam2.lp_norms) CHECK(nrm == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("measure_ratio: witness saturates g(t0) = 10 on diag(1, x^2)") {
    const auto w = diag_one_xsq();
    const auto w1 = constant_scalar_weight(unit_line());
    const LebesgueExponent p2(2.0);
    GridSpec spec;
    spec.counts = {8000};
    spec.axis_singular = {{0.0}};
    spec.grading_ratio = 1.002;
    const SampleGrid grid = build_grid(unit_line(), spec);
    const auto r = coordinate_direction(2, 1);
    const std::vector<double> eps = {0.05, 0.02, 0.01, 0.005};
    const auto fam = generate_witness(w, w1, p2, r, {0.1}, eps, grid);

    std::vector<double> ratios;
    for (std::size_t i = 0; i < eps.size(); ++i)
        ratios.push_back(measure_ratio(fam.functions[i], w, w1, p2, r, grid));
    // deviation from g(t0) shrinks along the ladder and ends within 5%
    for (std::size_t i = 0; i + 1 < ratios.size(); ++i)
        CHECK(std::abs(ratios[i + 1] - 10.0) <= std::abs(ratios[i] - 10.0) + 1e-6);
    CHECK(ratios.back() == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("measure_ratio: sufficiency bound over random test functions") {
    const auto paper = catalog_weight("paper_example", json::object(), unit_line());
    const LebesgueExponent p2(2.0);
    // bounded case: the eigen-projection P_{v_1}: L^p(W) -> L^p(lambda_1)
    auto base = std::make_shared<MatrixWeight>(paper);
    const ScalarWeight lambda1(
        unit_line(), "lambda_1",
        [base](const Point& t) { return base->eigensystem_at(t).values[0]; },
        paper.axis_singular(), [base](const Point& t) { return base->is_singular_point(t); });
    const auto r = eigenvector_direction(paper, 0);

    GridSpec spec;
    spec.counts = {600};
    spec.axis_singular = {{0.0}};
    spec.grading_ratio = 1.01;
    const SampleGrid grid = build_grid(unit_line(), spec);

    const auto est = projection_bound(paper, lambda1, p2, r, default_ladder(256));
    CHECK(est.verdict == EssSupVerdict::BoundedAtResolution);
    CHECK(est.b_hat == doctest::Approx(1.0).epsilon(1e-9));

    auto rng = seeded_rng(555);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<CVector> f(grid.size());
        // random piecewise-constant function over 8 blocks
        std::vector<CVector> blocks(8, CVector(2));
        for (auto& b : blocks)
            for (int i = 0; i < 2; ++i) b[i] = Complex(g(rng), g(rng));
        for (std::size_t j = 0; j < grid.size(); ++j)
            f[j] = blocks[(j * 8) / grid.size()];
        const double ratio = measure_ratio(f, paper, lambda1, p2, r, grid);
        CHECK(ratio <= est.b_hat * 1.05);
    }
}
