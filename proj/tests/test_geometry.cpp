#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fracspec/geometry.hpp"

using namespace fracspec;

TEST_CASE("domain factories validate") {
  CHECK_THROWS_AS(make_interval(0.0), validation_error);
  CHECK_THROWS_AS(make_disk(-1.0), validation_error);
  CHECK_THROWS_AS(make_box(1.0, 0.0), validation_error);
  CHECK(make_interval(2.0).diameter() == 2.0);
  CHECK(make_disk(1.5).diameter() == 3.0);
  CHECK(make_box(3.0, 4.0).diameter() == Catch::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("chord lengths against closed forms") {
  const auto seg = make_interval(2.0);
  CHECK(chord_length(seg, {0.0, 0.0}, 1.0, 0.0) == Catch::Approx(2.0));
  CHECK(chord_length(seg, {2.0, 0.0}, -1.0, 0.0) == Catch::Approx(2.0));

  const auto disk = make_disk(1.0);
  // from q on the boundary, |q + L e| = R gives L = -2 q.e
  CHECK(chord_length(disk, {1.0, 0.0}, -1.0, 0.0) == Catch::Approx(2.0));
  const double c = std::sqrt(0.5);
  CHECK(chord_length(disk, {1.0, 0.0}, -c, c) ==
        Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));

  const auto box = make_box(1.0, 1.0);
  CHECK(chord_length(box, {0.0, 0.0}, c, c) ==
        Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
  const double n5 = std::sqrt(5.0);
  CHECK(chord_length(box, {0.0, 0.0}, 2.0 / n5, 1.0 / n5) ==
        Catch::Approx(n5 / 2.0).epsilon(1e-12));
  CHECK(chord_length(box, {0.0, 0.5}, 1.0, 0.0) == Catch::Approx(1.0));
}

TEST_CASE("chord endpoints land on the boundary") {
  const auto disk = make_disk(0.75);
  const Point base{0.75 * std::cos(0.3), 0.75 * std::sin(0.3)};
  const auto fan = build_ray_fan(disk, base, 32);
  for (const auto& ray : fan.rays) {
    const Point far = ray.at(ray.length);
    CHECK(std::hypot(far.x, far.y) == Catch::Approx(0.75).epsilon(1e-10));
  }

  const auto box = make_box(2.0, 1.0);
  const auto bfan = build_ray_fan(box, {0.7, 0.0}, 48);
  for (const auto& ray : bfan.rays) {
    const Point far = ray.at(ray.length);
    const bool on_edge = std::abs(far.x) < 1e-10 ||
                         std::abs(far.x - 2.0) < 1e-10 ||
                         std::abs(far.y) < 1e-10 ||
                         std::abs(far.y - 1.0) < 1e-10;
    CHECK(on_edge);
    CHECK(far.x > -1e-10);
    CHECK(far.x < 2.0 + 1e-10);
    CHECK(far.y > -1e-10);
    CHECK(far.y < 1.0 + 1e-10);
  }
}

TEST_CASE("fan weights recover the angular measure") {
  const auto disk = make_disk(1.0);
  const auto fan = build_ray_fan(disk, {0.0, -1.0}, 17);
  double total = 0.0;
  for (double w : fan.weights) total += w;
  CHECK(total == Catch::Approx(pi).epsilon(1e-10));
  CHECK(fan.angular_measure() == Catch::Approx(pi).epsilon(1e-10));

  const auto box = make_box(1.0, 1.0);
  // corner spans a quarter turn
  const auto cfan = build_ray_fan(box, {0.0, 0.0}, 9);
  double ctot = 0.0;
  for (double w : cfan.weights) ctot += w;
  CHECK(ctot == Catch::Approx(pi / 2.0).epsilon(1e-10));
  // edge point spans a half turn
  const auto efan = build_ray_fan(box, {0.5, 1.0}, 9);
  double etot = 0.0;
  for (double w : efan.weights) etot += w;
  CHECK(etot == Catch::Approx(pi).epsilon(1e-10));
}

TEST_CASE("fan base must sit on the boundary") {
  const auto disk = make_disk(1.0);
  CHECK_THROWS_AS(build_ray_fan(disk, {0.0, 0.0}, 8), validation_error);
  CHECK_THROWS_AS(build_ray_fan(disk, {2.0, 0.0}, 8), validation_error);
}

TEST_CASE("interval fan is a single ray") {
  const auto seg = make_interval(3.0);
  const auto lo = build_ray_fan(seg, {0.0, 0.0}, 1);
  REQUIRE(lo.rays.size() == 1);
  CHECK(lo.rays[0].ex == 1.0);
  CHECK(lo.rays[0].length == Catch::Approx(3.0));
  CHECK(lo.weights[0] == 1.0);
  const auto hi = build_ray_fan(seg, {3.0, 0.0}, 1);
  CHECK(hi.rays[0].ex == -1.0);
}

TEST_CASE("fan grid mass reproduces areas") {
  const auto seg = make_interval(1.0);
  auto g1 = make_fan_grid(build_ray_fan(seg, {0.0, 0.0}, 1), 64);
  CHECK(g1->mass.sum() == Catch::Approx(1.0).epsilon(1e-13));

  const auto disk = make_disk(1.0);
  auto g2 = make_fan_grid(build_ray_fan(disk, {1.0, 0.0}, 256), 64);
  CHECK(g2->mass.sum() == Catch::Approx(pi).epsilon(2e-4));

  const auto box = make_box(1.0, 2.0);
  auto g3 = make_fan_grid(build_ray_fan(box, {0.0, 0.0}, 512), 64);
  CHECK(g3->mass.sum() == Catch::Approx(2.0).epsilon(2e-3));
}

TEST_CASE("grid positions trace the rays") {
  const auto disk = make_disk(1.0);
  const Point base{0.0, 1.0};
  auto g = make_fan_grid(build_ray_fan(disk, base, 8), 4);
  for (int k = 0; k < g->ray_count(); ++k) {
    const Point p0 = g->position(k, 0);
    CHECK(p0.x == Catch::Approx(base.x).margin(1e-14));
    CHECK(p0.y == Catch::Approx(base.y).margin(1e-14));
    const Point pN = g->position(k, 4);
    CHECK(std::hypot(pN.x, pN.y) == Catch::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("weighted inner product on the interval") {
  const auto seg = make_interval(1.0);
  auto g = make_fan_grid(build_ray_fan(seg, {0.0, 0.0}, 1), 256);
  auto one = GridFunction::sample(g, [](Point) { return 1.0; });
  CHECK(weighted_norm(one) == Catch::Approx(1.0).epsilon(1e-13));

  auto s1 = GridFunction::sample(g, [](Point p) { return std::sin(pi * p.x); });
  auto s2 = GridFunction::sample(g, [](Point p) { return std::sin(2.0 * pi * p.x); });
  CHECK(std::abs(weighted_inner_product(s1, s2)) < 1e-13);
  CHECK(weighted_norm(s1) == Catch::Approx(std::sqrt(0.5)).epsilon(1e-4));

  // conjugate linearity in the second slot
  GridFunction is2 = s2;
  is2.v *= complexd(0.0, 1.0);
  const complexd lhs = weighted_inner_product(s1, is2);
  const complexd rhs = std::conj(complexd(0.0, 1.0)) * weighted_inner_product(s1, s2);
  CHECK(std::abs(lhs - rhs) < 1e-14);
}

TEST_CASE("grid functions must share a grid") {
  const auto seg = make_interval(1.0);
  auto ga = make_fan_grid(build_ray_fan(seg, {0.0, 0.0}, 1), 8);
  auto gb = make_fan_grid(build_ray_fan(seg, {0.0, 0.0}, 1), 8);
  auto f = GridFunction::zero(ga);
  auto h = GridFunction::zero(gb);
  CHECK_THROWS_AS(weighted_inner_product(f, h), validation_error);
}

TEST_CASE("hoelder estimates") {
  const auto seg = make_interval(1.0);
  auto g = make_fan_grid(build_ray_fan(seg, {0.0, 0.0}, 1), 128);

  auto dec = GridFunction::sample(g, [](Point p) { return 2.0 - p.x; });
  const auto e1 = holder_estimate(dec, 1.0, 0.5);
  CHECK(e1.M == Catch::Approx(1.0).epsilon(1e-10));
  CHECK(e1.inf_rho == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(e1.monotone);

  auto inc = GridFunction::sample(g, [](Point p) { return 1.0 + p.x; });
  const auto e2 = holder_estimate(inc, 0.9, 0.5);
  CHECK(e2.M == Catch::Approx(1.0).epsilon(1e-10));
  CHECK(e2.inf_rho == Catch::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(e2.monotone);

  CHECK_THROWS_AS(holder_estimate(dec, 0.4, 0.5), validation_error);
  auto flipped = dec;
  flipped.v[3] = -1.0;
  CHECK_THROWS_AS(holder_estimate(flipped, 1.0, 0.5), validation_error);
  auto cplx = dec;
  cplx.v[3] += complexd(0.0, 0.5);
  CHECK_THROWS_AS(holder_estimate(cplx, 1.0, 0.5), validation_error);
}
