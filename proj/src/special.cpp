#include "scatlab/special.hpp"

#include <cmath>

namespace scatlab {
namespace sf {

double bessel_J(int m, double z) {
  int am = std::abs(m);
  double v = std::cyl_bessel_j(double(am), std::abs(z));
  if (z < 0 && am % 2) v = -v;        // J_m(-z) = (-1)^m J_m(z)
  if (m < 0 && am % 2) v = -v;        // J_{-m} = (-1)^m J_m
  return v;
}

double bessel_Y(int m, double z) {
  if (!(z > 0)) throw std::domain_error("bessel_Y: z must be positive");
  int am = std::abs(m);
  double v = std::cyl_neumann(double(am), z);
  if (m < 0 && am % 2) v = -v;
  return v;
}

cplx hankel1(int m, double z) {
  if (!(z > 0)) throw std::domain_error("hankel1: z must be positive");
  return {bessel_J(m, z), bessel_Y(m, z)};
}

// C'_m(z) = C_{m-1}(z) - (m/z) C_m(z) holds for J, Y, H
double bessel_Jp(int m, double z) {
  if (m == 0) return -bessel_J(1, z);
  return bessel_J(m - 1, z) - m / z * bessel_J(m, z);
}
double bessel_Yp(int m, double z) {
  if (m == 0) return -bessel_Y(1, z);
  return bessel_Y(m - 1, z) - m / z * bessel_Y(m, z);
}
cplx hankel1p(int m, double z) { return {bessel_Jp(m, z), bessel_Yp(m, z)}; }

double sph_j(int l, double z) {
  if (z < 0) throw std::domain_error("sph_j: z must be nonnegative");
  return std::sph_bessel(unsigned(l), z);
}
double sph_y(int l, double z) {
  if (!(z > 0)) throw std::domain_error("sph_y: z must be positive");
  return std::sph_neumann(unsigned(l), z);
}
cplx sph_h1(int l, double z) { return {sph_j(l, z), sph_y(l, z)}; }

// f'_l(z) = f_{l-1}(z) - (l+1)/z f_l(z)
double sph_jp(int l, double z) {
  if (l == 0) return -sph_j(1, z);
  return sph_j(l - 1, z) - (l + 1) / z * sph_j(l, z);
}
double sph_yp(int l, double z) {
  if (l == 0) return -sph_y(1, z);
  return sph_y(l - 1, z) - (l + 1) / z * sph_y(l, z);
}
cplx sph_h1p(int l, double z) { return {sph_jp(l, z), sph_yp(l, z)}; }

double legendre_P(int l, double x) { return std::legendre(unsigned(l), x); }

cplx sph_harmonic(int l, int m, const Pt& dir) {
  double r = norm(dir);
  if (r == 0) throw std::domain_error("sph_harmonic: zero direction");
  double ct = dir[2] / r;
  ct = std::min(1.0, std::max(-1.0, ct));
  double theta = std::acos(ct);
  double phi = std::atan2(dir[1], dir[0]);
  int am = std::abs(m);
  if (am > l) throw std::domain_error("sph_harmonic: |m| > l");
  // std::sph_legendre carries the Condon-Shortley phase and the full
  // normalization, so this is Y_l^m at azimuth 0 for m >= 0
  double plm = std::sph_legendre(unsigned(l), unsigned(am), theta);
  cplx v = plm * std::exp(I * double(am) * phi);
  if (m >= 0) return v;
  double s = (am % 2) ? -1.0 : 1.0;  // Y_l^{-m} = (-1)^m conj(Y_l^m)
  return s * std::conj(v);
}

cplx circ_harmonic(int m, const Pt& dir) {
  double theta = std::atan2(dir[1], dir[0]);
  return std::exp(I * double(m) * theta) / std::sqrt(2 * PI);
}

}  // namespace sf

cplx radial_wave(int dim, int l, RadialKind kind, double z) {
  if (kind == RadialKind::Outgoing && !(z > 0))
    throw std::domain_error("radial_wave: outgoing wave needs z > 0");
  if (dim == 2) {
    switch (kind) {
      case RadialKind::Regular: return sf::bessel_J(l, z);
      case RadialKind::Irregular: return sf::bessel_Y(l, z);
      case RadialKind::Outgoing: return sf::hankel1(l, z);
    }
  } else if (dim == 3) {
    switch (kind) {
      case RadialKind::Regular: return sf::sph_j(l, z);
      case RadialKind::Irregular: return sf::sph_y(l, z);
      case RadialKind::Outgoing: return sf::sph_h1(l, z);
    }
  }
  throw std::invalid_argument("radial_wave: dim must be 2 or 3");
}

cplx radial_wave_deriv(int dim, int l, RadialKind kind, double z) {
  if (kind == RadialKind::Outgoing && !(z > 0))
    throw std::domain_error("radial_wave_deriv: outgoing wave needs z > 0");
  if (dim == 2) {
    switch (kind) {
      case RadialKind::Regular: return sf::bessel_Jp(l, z);
      case RadialKind::Irregular: return sf::bessel_Yp(l, z);
      case RadialKind::Outgoing: return sf::hankel1p(l, z);
    }
  } else if (dim == 3) {
    switch (kind) {
      case RadialKind::Regular: return sf::sph_jp(l, z);
      case RadialKind::Irregular: return sf::sph_yp(l, z);
      case RadialKind::Outgoing: return sf::sph_h1p(l, z);
    }
  }
  throw std::invalid_argument("radial_wave_deriv: dim must be 2 or 3");
}

cplx helmholtz_green(int dim, double E, double r) {
  if (!(E > 0)) throw std::domain_error("helmholtz_green: E must be positive");
  if (!(r > 0)) throw std::domain_error("helmholtz_green: r must be positive");
  double k = std::sqrt(E);
  if (dim == 3) return std::exp(I * k * r) / (4 * PI * r);
  if (dim == 2) return 0.25 * I * sf::hankel1(0, k * r);
  throw std::invalid_argument("helmholtz_green: dim must be 2 or 3");
}

}  // namespace scatlab
