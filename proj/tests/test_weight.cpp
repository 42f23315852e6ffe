#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "mw/errors.hpp"
#include "mw/numerics.hpp"
#include "mw/weight.hpp"

using namespace mw;
using nlohmann::json;

namespace {

DomainDescriptor unit_line() {
    Window w;
    w.lo = {0.0};
    w.hi = {1.0};
    return DomainDescriptor::euclidean(1, w);
}

// independent oracle: direct 2x2 inversion via the adjugate
CMatrix invert2x2(const CMatrix& m) {
    const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    CMatrix inv(2, 2);
    inv(0, 0) = m(1, 1) / det;
    inv(0, 1) = -m(0, 1) / det;
    inv(1, 0) = -m(1, 0) / det;
    inv(1, 1) = m(0, 0) / det;
    return inv;
}

HermitianMatrix random_pd(std::mt19937_64& rng, int n, double spread = 1.0) {
    std::normal_distribution<double> g;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
    CMatrix h = a * a.adjoint();
    h += std::pow(10.0, -spread) * CMatrix::Identity(n, n);
    return HermitianMatrix(h);
}

}  // namespace

TEST_CASE("fractional_power: identity fixed point and diagonal roots") {
    const auto id = HermitianMatrix::identity(3);
    for (double s : {-2.0, -0.5, 0.25, 1.0, 2.0})
        CHECK((fractional_power(id, s).matrix() - id.matrix()).norm() <= 1e-14);

    CMatrix d(2, 2);
    d.setZero();
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const auto root = fractional_power(HermitianMatrix(d), 0.5);
    CHECK(root.entry(0, 0).real() == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(root.entry(1, 1).real() == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(std::abs(root.entry(0, 1)) <= 1e-14);
}

TEST_CASE("fractional_power: paper weight inverse matches the 2x2 oracle") {
    const auto w = catalog_weight("paper_example", json::object(), unit_line());
    for (double x : {0.03, 0.25, 0.6, 0.99}) {
        const auto m = w.evaluate({x});
        const CMatrix inv_oracle = invert2x2(m.matrix());
        const auto inv = fractional_power(m, -1.0);
        CHECK((inv.matrix() - inv_oracle).norm() <= 1e-10 * inv_oracle.norm());
        // closed form: [[1/sqrt(x), -i/sqrt(x)], [i/sqrt(x), sqrt(x)+1/sqrt(x)]]
        const double irt = 1.0 / std::sqrt(x);
        CHECK(inv.entry(0, 0).real() == doctest::Approx(irt).epsilon(1e-10));
        CHECK(inv.entry(0, 1).imag() == doctest::Approx(-irt).epsilon(1e-10));
        CHECK(inv.entry(1, 1).real() ==
              doctest::Approx(std::sqrt(x) + irt).epsilon(1e-10));
    }
}

TEST_CASE("fractional_power: composition and inverse consistency on random PD") {
    auto rng = seeded_rng(31415);
    std::uniform_real_distribution<double> expo(-2.0, 2.0);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(trial % 5);
        const auto m = random_pd(rng, n);
        const double a = expo(rng), b = expo(rng);
        const auto left = fractional_power(fractional_power(m, a), b);
        const auto right = fractional_power(m, a * b);
        CHECK((left.matrix() - right.matrix()).norm() <= 1e-10 * right.matrix().norm());

        const auto inv = fractional_power(m, -1.0);
        CHECK((inv.matrix() * m.matrix() - CMatrix::Identity(n, n)).norm() <= 1e-10);

        // Hermitian closure
        CHECK((left.matrix() - left.matrix().adjoint().eval()).norm() <= 1e-12);
    }
}

TEST_CASE("fractional_power: near-singular spectrum is an error, not a clamp") {
    CMatrix d(2, 2);
    d.setZero();
    d(0, 0) = 1.0;
    d(1, 1) = 1e-14;
    try {
        fractional_power(HermitianMatrix(d), 0.5);
        FAIL("expected NearSingularError");
    } catch (const NearSingularError& e) {
        CHECK(e.min_eigenvalue() == doctest::Approx(1e-14).epsilon(1e-6));
    }
}

TEST_CASE("HermitianMatrix rejects non-Hermitian input") {
    CMatrix m(2, 2);
    m << Complex(1, 0), Complex(0.5, 0.2), Complex(0.5, 0.2), Complex(2, 0);
    CHECK_THROWS_AS(HermitianMatrix{m}, ShapeMismatchError);  // m(1,0) not conjugated
}

TEST_CASE("catalog: paper_example values and determinant") {
    const auto w = catalog_weight("paper_example", json::object(), unit_line());
    const auto m = w.evaluate({0.25});
    CHECK(m.entry(0, 0).real() == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(m.entry(0, 1) == Complex(0.0, 2.0));
    CHECK(m.entry(1, 0) == Complex(0.0, -2.0));
    CHECK(m.entry(1, 1).real() == doctest::Approx(2.0).epsilon(1e-14));

    GridSpec spec;
    spec.counts = {1000};
    spec.singular_points = {{0.0}};
    spec.grading_ratio = 1.004;
    const SampleGrid grid = build_grid(w.domain(), spec);
    double worst = 0;
    for (const auto& t : grid.points) {
        const CMatrix v = w.evaluate(t).matrix();
        const Complex det = v(0, 0) * v(1, 1) - v(0, 1) * v(1, 0);
        worst = std::max(worst, std::abs(det - Complex(1.0, 0.0)));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("catalog: identity, diag_power, scalar_power") {
    const auto id = catalog_weight("identity", json{{"n", 3}}, unit_line());
    CHECK((id.evaluate({0.7}).matrix() - CMatrix::Identity(3, 3)).norm() == 0.0);

    Window w5;
    w5.lo = {0.0};
    w5.hi = {5.0};
    const auto dom5 = DomainDescriptor::euclidean(1, w5);
    const auto dp = catalog_weight("diag_power", json{{"alpha", {1.0, -0.5}}}, dom5);
    const auto m = dp.evaluate({4.0});
    CHECK(m.entry(0, 0).real() == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(m.entry(1, 1).real() == doctest::Approx(0.5).epsilon(1e-14));

    const auto sp = catalog_weight("scalar_power", json{{"alpha", 0.5}}, unit_line());
    CHECK(sp.evaluate({0.25}).entry(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));

    CHECK_THROWS_AS(catalog_weight("no_such_weight", json::object(), unit_line()), ConfigError);
    CHECK_THROWS_AS(catalog_weight("diag_power", json::object(), unit_line()), ConfigError);
}

TEST_CASE("catalog: rotated_power conjugates a diagonal weight") {
    const double th = 0.6;
    const auto rp = catalog_weight("rotated_power", json{{"alpha", {0.5, -0.5}}, {"angle", th}},
                                   unit_line());
    const auto m = rp.evaluate({0.3});
    // oracle: assemble U diag U^T directly
    Eigen::Matrix2d u;
    u << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
    d(0, 0) = std::pow(0.3, 0.5);
    d(1, 1) = std::pow(0.3, -0.5);
    const Eigen::Matrix2d expect = u * d * u.transpose();
    CHECK((m.matrix().real() - expect).norm() <= 1e-13 * expect.norm());
    CHECK(m.matrix().imag().norm() <= 1e-15);
}

TEST_CASE("catalog: product_diag_power on a product domain") {
    Window w;
    w.lo = {0.0, 0.0};
    w.hi = {1.0, 1.0};
    const auto dom = DomainDescriptor::product_euclidean(1, 1, w);
    const auto pw = catalog_weight("product_diag_power",
                                   json{{"alpha", {0.5, -0.25}}, {"beta", {0.25, 0.5}}}, dom);
    const auto m = pw.evaluate({0.25, 0.5});
    CHECK(m.entry(0, 0).real() ==
          doctest::Approx(std::pow(0.25, 0.5) * std::pow(0.5, 0.25)).epsilon(1e-14));
    CHECK(m.entry(1, 1).real() ==
          doctest::Approx(std::pow(0.25, -0.25) * std::pow(0.5, 0.5)).epsilon(1e-14));
    CHECK_THROWS_AS(
        catalog_weight("product_diag_power", json{{"alpha", {0.5}}, {"beta", {0.5}}},
                       unit_line()),
        ConfigError);
}

TEST_CASE("evaluate: singular points rejected, degenerate samples flagged") {
    const auto w = catalog_weight("paper_example", json::object(), unit_line());
    CHECK_THROWS_AS(w.evaluate({0.0}), SingularPointError);

    const MatrixWeight bad(unit_line(), 2, "degenerate", [](const Point&) {
        CMatrix m(2, 2);
        m.setZero();
        m(0, 0) = 1.0;
        return m;  // second eigenvalue 0: not PD
    });
    try {
        bad.evaluate({0.5});
        FAIL("expected DegenerateSampleError");
    } catch (const DegenerateSampleError& e) {
        REQUIRE(e.location().size() == 1);
        CHECK(e.location()[0] == doctest::Approx(0.5));
    }
}

TEST_CASE("entry_of_power: paper entries and identity off-diagonals") {
    const auto w = catalog_weight("paper_example", json::object(), unit_line());
    for (double x : {0.04, 0.5, 0.81}) {
        CHECK(w.entry_of_power_at({x}, -1.0, 0, 0).real() ==
              doctest::Approx(1.0 / std::sqrt(x)).epsilon(1e-10));
        CHECK(w.entry_of_power_at({x}, 1.0, 0, 0).real() ==
              doctest::Approx(std::sqrt(x) + 1.0 / std::sqrt(x)).epsilon(1e-12));
        // w11 * w11^(-1) = 1 + 1/x
        const double prod = w.entry_of_power_at({x}, 1.0, 0, 0).real() *
                            w.entry_of_power_at({x}, -1.0, 0, 0).real();
        CHECK(prod == doctest::Approx(1.0 + 1.0 / x).epsilon(1e-9));
    }
    const auto id = catalog_weight("identity", json{{"n", 2}}, unit_line());
    for (double s : {-1.5, 0.5, 2.0})
        CHECK(std::abs(id.entry_of_power_at({0.3}, s, 0, 1)) <= 1e-14);
}

TEST_CASE("weight_power view equals pointwise fractional power") {
    const auto w = catalog_weight("paper_example", json::object(), unit_line());
    const auto v = weight_power(w, -0.5);
    for (double x : {0.1, 0.4, 0.9}) {
        const auto direct = fractional_power(w.evaluate({x}), -0.5);
        CHECK((v.evaluate({x}).matrix() - direct.matrix()).norm() <= 1e-12);
    }
}

TEST_CASE("verify_positive_definite: identity clean, degenerate reported") {
    GridSpec spec;
    spec.counts = {64};
    const auto id = catalog_weight("identity", json{{"n", 2}}, unit_line());
    const auto rep = verify_positive_definite(id, build_grid(unit_line(), spec));
    CHECK(rep.failures.empty());
    CHECK(rep.min_eigenvalue == doctest::Approx(1.0));

    const auto w = catalog_weight("paper_example", json::object(), unit_line());
    GridSpec graded;
    graded.counts = {512};
    graded.singular_points = {{0.0}};
    const auto rep2 = verify_positive_definite(w, build_grid(w.domain(), graded));
    CHECK(rep2.failures.empty());
    CHECK(rep2.min_eigenvalue > 0.0);

    const MatrixWeight bad(unit_line(), 2, "degenerate", [](const Point& t) {
        CMatrix m(2, 2);
        m.setZero();
        m(0, 0) = 1.0;
        m(1, 1) = t[0] < 0.5 ? 1.0 : 0.0;
        return m;
    });
    const auto rep3 = verify_positive_definite(bad, build_grid(unit_line(), spec));
    CHECK(rep3.failures.size() == 32);
}

TEST_CASE("scalar weights: entries and derived targets") {
    const auto w = catalog_weight("paper_example", json::object(), unit_line());
    const auto w11 = diagonal_entry_weight(w, 0);
    CHECK(w11.evaluate({0.25}) == doctest::Approx(2.5).epsilon(1e-13));

    // (w_kk^{(2/p)})^{p/2} at p = 2 is just w_kk^{(1)}
    const auto cond = entry_power_weight(w, 1.0, 0, 1.0);
    CHECK(cond.evaluate({0.25}) == doctest::Approx(2.5).epsilon(1e-12));

    const auto as_mat = as_matrix_weight(w11);
    CHECK(as_mat.dim() == 1);
    CHECK(as_mat.evaluate({0.25}).entry(0, 0).real() == doctest::Approx(2.5).epsilon(1e-13));
}

TEST_CASE("tabulated weights: save/load round trip and window restriction") {
    const auto w = catalog_weight("paper_example", json::object(), unit_line());
    GridSpec spec;
    spec.counts = {32};
    spec.singular_points = {{0.0}};
    const std::string path = "test_tabulated_weight.mwt";
    save_tabulated_weight(path, w, spec);
    const auto loaded = load_tabulated_weight(path);
    CHECK(loaded.dim() == 2);

    const SampleGrid grid = build_grid(w.domain(), spec);
    for (std::size_t i = 0; i < grid.size(); i += 7) {
        const auto& t = grid.points[i];
        CHECK((loaded.evaluate(t).matrix() - w.evaluate(t).matrix()).norm() <= 1e-12);
    }
    // nearest-sample semantics: a point between samples maps to a grid value
    const auto v = loaded.evaluate({grid.points[10][0] + 1e-9});
    CHECK((v.matrix() - w.evaluate(grid.points[10]).matrix()).norm() <= 1e-12);

    CHECK_THROWS_AS(loaded.evaluate({1.5}), DomainMismatchError);
    std::remove(path.c_str());
}
