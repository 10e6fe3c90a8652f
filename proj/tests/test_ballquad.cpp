#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "scatlab/ballquad.hpp"

using namespace scatlab;

TEST_CASE("half-space fraction: axis-aligned planes ramp linearly") {
  double n[3] = {1, 0, 0};
  for (int dim : {2, 3}) {
    CHECK(halfspace_box_fraction(dim, n, 0.5, -0.6) == doctest::Approx(0.0));
    CHECK(halfspace_box_fraction(dim, n, 0.5, -0.25) == doctest::Approx(0.25));
    CHECK(halfspace_box_fraction(dim, n, 0.5, 0.0) == doctest::Approx(0.5));
    CHECK(halfspace_box_fraction(dim, n, 0.5, 0.25) == doctest::Approx(0.75));
    CHECK(halfspace_box_fraction(dim, n, 0.5, 0.7) == doctest::Approx(1.0));
  }
}

TEST_CASE("half-space fraction: oblique planes against closed forms") {
  double s = 1.0 / std::sqrt(2.0);
  double n2[3] = {s, s, 0};
  // x + y <= -1/2 cuts the corner triangle of area 1/8 off the unit box
  CHECK(halfspace_box_fraction(2, n2, 0.5, -0.5 * s) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(halfspace_box_fraction(2, n2, 0.5, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(halfspace_box_fraction(2, n2, 0.5, 0.5 * s) == doctest::Approx(0.875).epsilon(1e-12));

  double t = 1.0 / std::sqrt(3.0);
  double n3[3] = {t, t, t};
  // corner simplices of the unit box: {x+y+z <= -1/2} has volume 1/6,
  // {x+y+z <= -1} has volume (1/2)^3/6
  CHECK(halfspace_box_fraction(3, n3, 0.5, -0.5 * t) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(halfspace_box_fraction(3, n3, 0.5, -1.0 * t) ==
        doctest::Approx(1.0 / 48.0).epsilon(1e-12));
  CHECK(halfspace_box_fraction(3, n3, 0.5, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("half-space fraction is monotone in the offset") {
  double n[3] = {0.3, -0.8, 0.52};
  double len = std::sqrt(dot({0.3, -0.8, 0.52}, {0.3, -0.8, 0.52}));
  for (int i = 0; i < 3; ++i) n[i] /= len;
  double prev = -1;
  for (double b = -1.0; b <= 1.0; b += 0.02) {
    double f = halfspace_box_fraction(3, n, 0.5, b);
    CHECK(f >= prev - 1e-13);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    prev = f;
  }
}

TEST_CASE("ball weights recover the ball volume") {
  SUBCASE("2D") {
    Grid g = Grid::cube(2, 1.0, 64);
    auto w = ball_weights(g, {0.05, -0.02}, 0.8);
    double vol = std::accumulate(w.begin(), w.end(), 0.0);
    CHECK(std::abs(vol - PI * 0.64) / (PI * 0.64) < 1e-6);
  }
  SUBCASE("3D") {
    Grid g = Grid::cube(3, 1.0, 32);
    double R = 0.75;
    auto w = ball_weights(g, {0.0, 0.04, -0.03}, R);
    double vol = std::accumulate(w.begin(), w.end(), 0.0);
    double exact = 4.0 / 3.0 * PI * R * R * R;
    CHECK(std::abs(vol - exact) / exact < 1e-5);
  }
}

TEST_CASE("subdivision depth tightens the boundary error") {
  Grid g = Grid::cube(2, 1.0, 48);
  double R = 0.7, exact = PI * R * R;
  auto w1 = ball_weights(g, {}, R, 1);
  auto w4 = ball_weights(g, {}, R, 4);
  double e1 = std::abs(std::accumulate(w1.begin(), w1.end(), 0.0) - exact);
  double e4 = std::abs(std::accumulate(w4.begin(), w4.end(), 0.0) - exact);
  CHECK(e4 < e1);
  CHECK(e4 / exact < 5e-6);
}

TEST_CASE("weights are bounded by the cell measure and vanish far away") {
  Grid g = Grid::cube(3, 1.0, 16);
  double R = 0.5;
  auto w = ball_weights(g, {}, R);
  double cell = std::pow(g.h, 3);
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    CHECK(w[std::size_t(i)] >= 0.0);
    CHECK(w[std::size_t(i)] <= cell * (1 + 1e-12));
    Pt x = g.point_of_index(i);
    double r = norm(x);
    if (r > R + g.h) CHECK(w[std::size_t(i)] == 0.0);
    if (r < R - g.h) CHECK(w[std::size_t(i)] == doctest::Approx(cell));
  }
}

TEST_CASE("smooth integrals over the ball converge at second order") {
  // int_{B_R} |x|^2 dx = pi R^4 / 2 in 2D
  double R = 0.85;
  double exact = PI * std::pow(R, 4) / 2;
  auto value = [&](int npts) {
    Grid g = Grid::cube(2, 1.0, npts);
    auto w = ball_weights(g, {}, R);
    double acc = 0;
    for (std::int64_t i = 0; i < g.npts(); ++i) {
      Pt x = g.point_of_index(i);
      acc += w[std::size_t(i)] * dot(x, x);
    }
    return acc;
  };
  double e32 = std::abs(value(32) - exact);
  double e64 = std::abs(value(64) - exact);
  CHECK(e64 < exact * 1e-3);
  CHECK(e32 / e64 > 3.0);
}

TEST_CASE("refusals: bad radius and balls leaving the box") {
  Grid g = Grid::cube(2, 1.0, 16);
  CHECK_THROWS_AS(ball_weights(g, {}, 0.0), PreconditionError);
  CHECK_THROWS_AS(ball_weights(g, {}, -1.0), PreconditionError);
  CHECK_THROWS_AS(ball_weights(g, {0.5, 0.0}, 0.8), PreconditionError);
}
