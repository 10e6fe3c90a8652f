#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "scatlab/special.hpp"

using namespace scatlab;

namespace {

// power-series oracle for J_m, small argument
double J_series(int m, double z) {
  double term = std::pow(z / 2, m);
  for (int i = 2; i <= m; ++i) term /= i;
  double sum = term;
  for (int s = 1; s < 40; ++s) {
    term *= -(z * z / 4) / (s * (s + m));
    sum += term;
  }
  return sum;
}

// asymptotic oracle for J_m, large argument (two correction terms)
double J_asym(int m, double z) {
  double mu = 4.0 * m * m;
  double chi = z - (0.5 * m + 0.25) * PI;
  double p = 1 - (mu - 1) * (mu - 9) / (128 * z * z);
  double q = (mu - 1) / (8 * z);
  return std::sqrt(2 / (PI * z)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Y_0 series oracle via the standard log expansion
double Y0_series(double z) {
  const double euler = 0.57721566490153286061;
  double sum = 0, term = 1, hk = 0;
  for (int s = 1; s < 40; ++s) {
    term *= -(z * z / 4) / (s * s);
    hk += 1.0 / s;
    sum += term * hk;
  }
  return 2 / PI * ((std::log(z / 2) + euler) * J_series(0, z) - sum);
}

}  // namespace

TEST_CASE("cylinder Bessel against series and asymptotic oracles") {
  for (double z : {0.1, 0.5, 1.0, 2.0}) {
    for (int m : {0, 1, 2, 5}) {
      CHECK(sf::bessel_J(m, z) == doctest::Approx(J_series(m, z)).epsilon(1e-13));
    }
  }
  for (double z : {60.0, 150.0}) {
    for (int m : {0, 1, 3}) {
      // the two-term oracle itself truncates at ~1e-5 relative for z = 60
      CHECK(sf::bessel_J(m, z) == doctest::Approx(J_asym(m, z)).epsilon(1e-4));
    }
  }
  CHECK(sf::bessel_Y(0, 0.3) == doctest::Approx(Y0_series(0.3)).epsilon(1e-12));
  CHECK(sf::bessel_Y(0, 1.7) == doctest::Approx(Y0_series(1.7)).epsilon(1e-12));
}

TEST_CASE("negative order reflection") {
  CHECK(sf::bessel_J(-3, 1.3) == doctest::Approx(-sf::bessel_J(3, 1.3)));
  CHECK(sf::bessel_J(-2, 1.3) == doctest::Approx(sf::bessel_J(2, 1.3)));
  CHECK(sf::bessel_Y(-1, 0.8) == doctest::Approx(-sf::bessel_Y(1, 0.8)));
}

TEST_CASE("spherical Bessel closed forms") {
  for (double z : {0.3, 1.0, 4.0, 20.0}) {
    CHECK(sf::sph_j(0, z) == doctest::Approx(std::sin(z) / z).epsilon(1e-14));
    CHECK(sf::sph_y(0, z) == doctest::Approx(-std::cos(z) / z).epsilon(1e-14));
    CHECK(sf::sph_j(1, z) == doctest::Approx(std::sin(z) / (z * z) - std::cos(z) / z).epsilon(1e-12));
  }
}

TEST_CASE("Wronskians pin the J/Y and j/y pairings") {
  // J_m Y'_m - J'_m Y_m = 2/(pi z)
  for (double z : {0.5, 5.0, 50.0}) {
    for (int m : {0, 1, 4}) {
      double w = sf::bessel_J(m, z) * sf::bessel_Yp(m, z) - sf::bessel_Jp(m, z) * sf::bessel_Y(m, z);
      CHECK(w == doctest::Approx(2 / (PI * z)).epsilon(1e-11));
    }
  }
  // j_l y'_l - j'_l y_l = 1/z^2
  for (double z : {0.5, 5.0, 50.0}) {
    for (int l : {0, 1, 4}) {
      double w = sf::sph_j(l, z) * sf::sph_yp(l, z) - sf::sph_jp(l, z) * sf::sph_y(l, z);
      CHECK(w == doctest::Approx(1 / (z * z)).epsilon(1e-11));
    }
  }
}

TEST_CASE("outgoing radial wave rejects z <= 0") {
  CHECK_THROWS(radial_wave(2, 0, RadialKind::Outgoing, 0.0));
  CHECK_THROWS(radial_wave(3, 1, RadialKind::Outgoing, -1.0));
  CHECK_THROWS(radial_wave_deriv(3, 0, RadialKind::Outgoing, 0.0));
}

TEST_CASE("spherical harmonics: values, conjugation, addition theorem") {
  CHECK(std::abs(sf::sph_harmonic(0, 0, {0.3, -0.2, 0.9}) - cplx(1 / std::sqrt(4 * PI))) < 1e-14);
  // Y_1^0 = sqrt(3/4pi) cos(theta)
  Pt d{0.48, 0.6, 0.64};
  CHECK(std::abs(sf::sph_harmonic(1, 0, d) - cplx(std::sqrt(3 / (4 * PI)) * 0.64)) < 1e-14);
  // Y_1^1 = -sqrt(3/8pi) sin(theta) e^{i phi}
  cplx y11 = sf::sph_harmonic(1, 1, {1, 0, 0});
  CHECK(std::abs(y11 - cplx(-std::sqrt(3 / (8 * PI)))) < 1e-14);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int rep = 0; rep < 4; ++rep) {
    Pt n{u(rng), u(rng), u(rng)};
    for (int l = 0; l <= 6; ++l) {
      double sum = 0;
      for (int m = -l; m <= l; ++m) {
        cplx y = sf::sph_harmonic(l, m, n);
        sum += std::norm(y);
        // conjugation symmetry
        cplx yc = sf::sph_harmonic(l, -m, n);
        double sgn = (m % 2 == 0) ? 1.0 : -1.0;
        CHECK(std::abs(std::conj(y) * sgn - yc) < 1e-13);
      }
      CHECK(sum == doctest::Approx((2 * l + 1) / (4 * PI)).epsilon(1e-12));
    }
  }
}

TEST_CASE("circular harmonics") {
  Pt d{std::cos(1.1), std::sin(1.1)};
  cplx v = sf::circ_harmonic(3, d);
  CHECK(std::abs(v - std::exp(cplx(0, 3 * 1.1)) / std::sqrt(2 * PI)) < 1e-14);
  CHECK(std::abs(sf::circ_harmonic(-3, d) - std::conj(v)) < 1e-14);
}

TEST_CASE("Green kernel closed forms and outgoing sign") {
  double E = 2.0, k = std::sqrt(2.0);
  for (double r : {0.25, 1.0, 3.0}) {
    cplx g3 = helmholtz_green(3, E, r);
    CHECK(std::abs(g3 - std::exp(I * k * r) / (4 * PI * r)) < 1e-15);
    cplx g2 = helmholtz_green(2, E, r);
    CHECK(std::abs(g2 - 0.25 * I * cplx(sf::bessel_J(0, k * r), sf::bessel_Y(0, k * r))) < 1e-15);
  }
  // Im G > 0 near the origin for outgoing normalization
  CHECK(helmholtz_green(2, 1.0, 1e-6).imag() > 0);
  CHECK(helmholtz_green(3, 1.0, 1e-6).imag() > 0);
  // 2D kernel against the series oracle at small kr
  double r = 0.05;
  cplx oracle = 0.25 * I * cplx(J_series(0, r), Y0_series(r));
  CHECK(std::abs(helmholtz_green(2, 1.0, r) - oracle) < 1e-14);
  // and the large-argument asymptotic form with its first correction
  double R = 80.0;
  cplx asym = 0.25 * I * std::sqrt(2 / (PI * R)) * std::exp(I * (R - PI / 4)) * (1.0 - 0.125 * I / R);
  CHECK(std::abs(helmholtz_green(2, 1.0, R) - asym) / std::abs(asym) < 1e-4);
  CHECK_THROWS(helmholtz_green(3, 1.0, 0.0));
  CHECK_THROWS(helmholtz_green(3, -1.0, 1.0));
}
