#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scatlab/sphere.hpp"
#include "scatlab/special.hpp"

using namespace scatlab;

TEST_CASE("2D rule: node count, uniform weights, L=0 case") {
  auto g = sphere_rule(2, 0);
  REQUIRE(g.size() == 2);
  CHECK(g.w[0] == doctest::Approx(PI));
  CHECK(g.w[1] == doctest::Approx(PI));

  auto g8 = sphere_rule(2, 8);
  CHECK(g8.size() == 18);
  double s = 0;
  for (double w : g8.w) s += w;
  CHECK(s == doctest::Approx(2 * PI).epsilon(1e-14));
}

TEST_CASE("weights positive, nodes unit length, total measure") {
  for (int dim : {2, 3}) {
    for (int L : {0, 3, 7}) {
      auto g = sphere_rule(dim, L);
      double s = 0;
      for (int q = 0; q < g.size(); ++q) {
        CHECK(g.w[q] > 0);
        CHECK(std::abs(norm(g.nodes[q]) - 1.0) < 1e-14);
        s += g.w[q];
      }
      CHECK(s == doctest::Approx(surface_area(dim)).epsilon(1e-13));
    }
  }
}

TEST_CASE("rule of degree L integrates harmonic products up to 2L exactly") {
  for (int dim : {2, 3}) {
    int L = 4;
    auto rule = sphere_rule(dim, L);
    HarmonicBasis basis{dim, L};
    // Gram matrix must be the identity to near machine precision
    for (int a = 0; a < basis.size(); ++a) {
      for (int b = 0; b <= a; ++b) {
        cplx s = 0;
        for (int q = 0; q < rule.size(); ++q)
          s += rule.w[q] * basis.eval(a, rule.nodes[q]) * std::conj(basis.eval(b, rule.nodes[q]));
        double expect = (a == b) ? 1.0 : 0.0;
        CHECK(std::abs(s - cplx(expect)) < 1e-12);
      }
    }
  }
}

TEST_CASE("single harmonics of degree <= 2L integrate to zero (3D)") {
  int L = 3;
  auto rule = sphere_rule(3, L);
  for (int l = 1; l <= 2 * L; ++l) {
    for (int m = -l; m <= l; ++m) {
      cplx s = 0;
      for (int q = 0; q < rule.size(); ++q) s += rule.w[q] * sf::sph_harmonic(l, m, rule.nodes[q]);
      CHECK(std::abs(s) < 1e-10);
    }
  }
}

TEST_CASE("basis indexing round trip") {
  for (int dim : {2, 3}) {
    HarmonicBasis b{dim, 5};
    for (int i = 0; i < b.size(); ++i) {
      CHECK(b.index_of(b.l_of(i), b.m_of(i)) == i);
    }
  }
  HarmonicBasis b3{3, 5};
  CHECK(b3.size() == 36);
  HarmonicBasis b2{2, 5};
  CHECK(b2.size() == 11);
  // 2D: l_of reports |m| for the plane-wave phase i^{|m|}
  CHECK(b2.l_of(b2.index_of(0, -4)) == 4);
}

TEST_CASE("harmonic matrix shape and a consistency spot check") {
  auto rule = sphere_rule(3, 2);
  HarmonicBasis basis{3, 2};
  auto Y = harmonic_matrix(basis, rule);
  REQUIRE(Y.rows() == rule.size());
  REQUIRE(Y.cols() == basis.size());
  CHECK(std::abs(Y(3, basis.index_of(1, 1)) - sf::sph_harmonic(1, 1, rule.nodes[3])) == 0.0);
}
