#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fracspec/grid.hpp"
#include "fracspec/quadrature.hpp"

using namespace fracspec;

TEST_CASE("gamma function anchors") {
  CHECK(gamma_fn(0.5) == Catch::Approx(1.7724538509055160273).epsilon(1e-15));
  CHECK(gamma_fn(1.0) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_fn(2.5) == Catch::Approx(1.3293403881791370205).epsilon(1e-15));
  CHECK(1.0 / gamma_fn(0.5) == Catch::Approx(0.5641895835477563).epsilon(1e-14));
  CHECK(1.0 / gamma_fn(1.5) == Catch::Approx(1.1283791670955126).epsilon(1e-14));
  CHECK(gamma_fn(5.0) == Catch::Approx(24.0).epsilon(1e-14));
}

TEST_CASE("gamma function properties") {
  for (double x : {0.3, 0.7, 1.1, 2.4, 3.9}) {
    CHECK(gamma_fn(x + 1.0) == Catch::Approx(x * gamma_fn(x)).epsilon(1e-13));
  }
  // reflection on (0,1)
  for (double x : {0.2, 0.45, 0.5, 0.8}) {
    CHECK(gamma_fn(x) * gamma_fn(1.0 - x) ==
          Catch::Approx(pi / std::sin(pi * x)).epsilon(1e-13));
  }
  // duplication
  for (double x : {0.4, 1.3, 2.2}) {
    const double lhs = gamma_fn(2.0 * x);
    const double rhs = std::pow(2.0, 2.0 * x - 1.0) / std::sqrt(pi) *
                       gamma_fn(x) * gamma_fn(x + 0.5);
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gamma_fn(0.0), validation_error);
  CHECK_THROWS_AS(gamma_fn(-1.5), validation_error);
}

TEST_CASE("gauss legendre rule") {
  const auto rule = make_gauss_legendre(8);
  double wsum = 0.0;
  for (double w : rule.weights) wsum += w;
  CHECK(wsum == Catch::Approx(2.0).epsilon(1e-14));

  // exact through degree 15
  for (int p = 0; p <= 15; ++p) {
    const double got =
        integrate_gl(rule, 0.0, 1.0, [p](double x) { return std::pow(x, p); });
    CHECK(got == Catch::Approx(1.0 / (p + 1)).epsilon(1e-12));
  }
  const double si = integrate_gl(rule, 0.0, pi, [](double x) { return std::sin(x); });
  CHECK(si == Catch::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("power kernel cell moments match quadrature") {
  const auto rule = make_gauss_legendre(48);
  const double r = 0.9, a = 0.2, b = 0.5;
  for (double s : {0.3, 0.5, 0.8, 1.0, -0.4}) {
    const double m0 = left_moment0(r, a, b, s);
    const double m1 = left_moment1(r, a, b, s);
    const double q0 = integrate_gl(rule, a, b,
        [&](double t) { return std::pow(r - t, s - 1.0); });
    const double q1 = integrate_gl(rule, a, b,
        [&](double t) { return (t - a) * std::pow(r - t, s - 1.0); });
    CHECK(m0 == Catch::Approx(q0).epsilon(1e-9));
    CHECK(m1 == Catch::Approx(q1).epsilon(1e-9));
  }
  const double rr = 0.1;
  for (double s : {0.3, 0.5, 0.8, 1.0, -0.4}) {
    const double m0 = right_moment0(rr, a, b, s);
    const double m1 = right_moment1(rr, a, b, s);
    const double q0 = integrate_gl(rule, a, b,
        [&](double t) { return std::pow(t - rr, s - 1.0); });
    const double q1 = integrate_gl(rule, a, b,
        [&](double t) { return (t - a) * std::pow(t - rr, s - 1.0); });
    CHECK(m0 == Catch::Approx(q0).epsilon(1e-9));
    CHECK(m1 == Catch::Approx(q1).epsilon(1e-9));
  }
}

TEST_CASE("singular rule reduces to trapezoid at s = 1") {
  const auto grid = RadialGrid::make(16, 2.0, Grading::uniform);
  const SingularRule rule(grid, 1.0, Side::left);
  const auto w = rule.row(16);
  const auto tw = grid.trapezoid_weights();
  for (int j = 0; j <= 16; ++j) CHECK(w[j] == Catch::Approx(tw[j]).margin(1e-15));
}

TEST_CASE("singular rule integrates linear densities exactly") {
  const auto grid = RadialGrid::make(20, 1.0, Grading::toward_base, 2.0);
  const SingularRule rule(grid, 0.5, Side::left);
  // at r = 1: integral_0^1 (c0 + c1 t)(1-t)^{-1/2} dt = 2 c0 + (4/3) c1
  Eigen::VectorXd g(21);
  for (int j = 0; j <= 20; ++j) g[j] = 0.7 + 1.9 * grid.nodes[j];
  CHECK(rule.apply(g, 20) ==
        Catch::Approx(2.0 * 0.7 + 4.0 / 3.0 * 1.9).epsilon(1e-13));

  // Beta(2, 1/2): integral_0^1 t (1-t)^{-1/2} dt = 4/3
  Eigen::VectorXd lin(21);
  for (int j = 0; j <= 20; ++j) lin[j] = grid.nodes[j];
  CHECK(rule.apply(lin, 20) == Catch::Approx(4.0 / 3.0).epsilon(1e-13));

  const SingularRule rr(grid, 0.5, Side::right);
  // at r = 0: integral_0^1 t * t^{-1/2} dt = 2/3
  CHECK(rr.apply(lin, 0) == Catch::Approx(2.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("singular rule interior target") {
  const auto grid = RadialGrid::make(64, 1.0, Grading::uniform);
  const SingularRule rule(grid, 0.5, Side::left);
  // at r = 0.5: integral_0^{1/2} (1/2 - t)^{-1/2} dt = 2 sqrt(1/2)
  Eigen::VectorXd one = Eigen::VectorXd::Ones(65);
  CHECK(rule.apply(one, 32) ==
        Catch::Approx(2.0 * std::sqrt(0.5)).epsilon(1e-13));
}

TEST_CASE("singular rule validates the exponent") {
  const auto grid = RadialGrid::make(4, 1.0, Grading::uniform);
  CHECK_THROWS_AS(SingularRule(grid, 0.0, Side::left), validation_error);
  CHECK_THROWS_AS(SingularRule(grid, -0.5, Side::left), validation_error);
  CHECK_THROWS_AS(SingularRule(grid, 1.5, Side::left), validation_error);
}

TEST_CASE("product weights helper matches the rule") {
  const auto grid = RadialGrid::make(8, 1.0, Grading::both_ends, 2.0);
  const SingularRule rule(grid, 0.7, Side::right);
  const auto a = rule.row(3);
  const auto b = product_weights(grid, 0.7, Side::right, 3);
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("radial grid gradings") {
  const auto u = RadialGrid::make(10, 3.0, Grading::uniform);
  CHECK(u.nodes[0] == 0.0);
  CHECK(u.nodes[10] == 3.0);
  CHECK(u.min_spacing() == Catch::Approx(0.3).epsilon(1e-14));
  CHECK(u.max_spacing() == Catch::Approx(0.3).epsilon(1e-14));

  const auto g = RadialGrid::make(10, 1.0, Grading::toward_base, 2.0);
  CHECK(g.nodes[0] == 0.0);
  CHECK(g.nodes[10] == 1.0);
  CHECK(g.spacing(0) < g.spacing(9));

  const auto e = RadialGrid::make(10, 1.0, Grading::both_ends, 2.0);
  CHECK(e.spacing(0) < e.spacing(4));
  CHECK(e.spacing(9) < e.spacing(4));
  // symmetric clustering
  CHECK(e.spacing(0) == Catch::Approx(e.spacing(9)).epsilon(1e-12));

  CHECK_THROWS_AS(RadialGrid::make(1, 1.0, Grading::uniform), validation_error);
  CHECK_THROWS_AS(RadialGrid::make(8, -1.0, Grading::uniform), validation_error);
  CHECK_THROWS_AS(RadialGrid::make(8, 1.0, Grading::toward_base, 0.5),
                  validation_error);
}

TEST_CASE("trapezoid weights integrate linear functions") {
  const auto grid = RadialGrid::make(13, 2.0, Grading::toward_base, 1.7);
  const auto w = grid.trapezoid_weights();
  double total = 0.0, first = 0.0;
  for (int j = 0; j <= 13; ++j) {
    total += w[j];
    first += w[j] * grid.nodes[j];
  }
  CHECK(total == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(first == Catch::Approx(2.0).epsilon(1e-14));
}
