#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scatlab/green.hpp"
#include "scatlab/special.hpp"

using namespace scatlab;

namespace {

SampledField gaussian_bump(const Grid& g, double sigma, Pt center = {}) {
  SampledField f(g, 1);
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    Pt x = g.point_of_index(i) - center;
    f.a[i] = std::exp(-dot(x, x) / (2 * sigma * sigma));
  }
  return f;
}

// fourth-order finite-difference Laplacian, interior points only
cplx fd_laplacian(const SampledField& u, int ix, int iy, int iz) {
  const Grid& g = u.g;
  double h2 = g.h * g.h;
  cplx acc = 0;
  auto val = [&](int dx, int dy, int dz) {
    return u.a[g.index(ix + dx, iy + dy, iz + dz)];
  };
  int dirs = g.dim;
  for (int d = 0; d < dirs; ++d) {
    int s[3] = {0, 0, 0};
    auto at = [&](int off) {
      s[0] = s[1] = s[2] = 0;
      s[d] = off;
      return val(s[0], s[1], s[2]);
    };
    acc += (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h2);
  }
  return acc;
}

}  // namespace

TEST_CASE("symbol limits are continuous at s=0 and s=k") {
  for (int dim : {2, 3}) {
    double E = 1.7, D = 3.0, k = std::sqrt(E);
    cplx lim0 = truncated_green_symbol(dim, E, D, dim == 3 ? 0.0 : 1e-9);
    cplx near0 = truncated_green_symbol(dim, E, D, 2e-4 / D);
    CHECK(std::abs(lim0 - near0) / std::abs(lim0) < 1e-5);
    cplx limk = truncated_green_symbol(dim, E, D, k * (1 + 1e-9));
    cplx neark = truncated_green_symbol(dim, E, D, k * (1 + 1e-4));
    CHECK(std::abs(limk - neark) / std::abs(limk) < 1e-3);
  }
}

TEST_CASE("2D symbol against direct numerical quadrature of the kernel transform") {
  double E = 1.0, D = 2.5;
  // (i pi / 2) int_0^D H0(kr) J0(sr) r dr by composite Simpson, singularity
  // at r=0 is integrable (log); start slightly off zero with a fine mesh
  for (double s : {0.4, 2.1}) {
    int n = 40000;
    double a = 1e-9;
    double hstep = (D - a) / n;
    cplx acc = 0;
    for (int i = 0; i <= n; ++i) {
      double r = a + i * hstep;
      double wgt = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      acc += wgt * sf::hankel1(0, std::sqrt(E) * r) * sf::bessel_J(0, s * r) * r;
    }
    acc *= hstep / 3.0 * 0.5 * I * PI;
    cplx sym = truncated_green_symbol(2, E, D, s);
    CHECK(std::abs(sym - acc) < 1e-8 * std::max(1.0, std::abs(sym)));
  }
}

TEST_CASE("3D symbol against direct numerical quadrature") {
  double E = 2.0, D = 1.8, k = std::sqrt(E);
  for (double s : {0.3, 1.9}) {
    int n = 20000;
    double hstep = D / n;
    cplx acc = 0;
    for (int i = 0; i <= n; ++i) {
      double r = i * hstep;
      double wgt = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      double sinc = (s * r < 1e-8) ? 1.0 : std::sin(s * r) / (s * r);
      acc += wgt * std::exp(I * k * r) * sinc * r;
    }
    acc *= hstep / 3.0;
    cplx sym = truncated_green_symbol(3, E, D, s);
    CHECK(std::abs(sym - acc) < 1e-9 * std::max(1.0, std::abs(sym)));
  }
}

TEST_CASE("zero in, zero out, and linearity") {
  Grid g = Grid::cube(2, 2.0, 64);
  SampledField z(g, 1);
  auto out = volume_convolve(1.0, z);
  CHECK(max_abs(out) == 0.0);

  auto f1 = gaussian_bump(g, 0.12);
  auto f2 = gaussian_bump(g, 0.09, {0.1, -0.05});
  SampledField sum(g, 1);
  for (size_t i = 0; i < sum.a.size(); ++i) sum.a[i] = 2.0 * f1.a[i] - 0.5 * f2.a[i];
  HelmholtzConvolver conv(g, 1.0, 1.0);
  SampledField o1(g, 1), o2(g, 1), os(g, 1);
  conv.apply(f1.comp(0), o1.comp(0));
  conv.apply(f2.comp(0), o2.comp(0));
  conv.apply(sum.comp(0), os.comp(0));
  double err = 0;
  for (size_t i = 0; i < os.a.size(); ++i)
    err = std::max(err, std::abs(os.a[i] - (2.0 * o1.a[i] - 0.5 * o2.a[i])));
  CHECK(err < 1e-12 * max_abs(os));
}

TEST_CASE("(-lap - E) inverts the convolution on a smooth bump, 2D at h=1/64") {
  // FD-Laplacian oracle: the convolved field must satisfy the PDE back to
  // the source, to the accuracy of the 4th-order stencil
  double E = 1.0;
  Grid g = Grid::cube(2, 2.0, 256);  // h = 1/64
  auto f = gaussian_bump(g, 0.11);
  auto u = volume_convolve(E, f);
  double num = 0, den = 0;
  for (int ix = 2; ix < g.n[0] - 2; ++ix)
    for (int iy = 2; iy < g.n[1] - 2; ++iy) {
      cplx lhs = -fd_laplacian(u, ix, iy, 0) - E * u.a[g.index(ix, iy)];
      cplx rhs = f.a[g.index(ix, iy)];
      num += std::norm(lhs - rhs);
      den += std::norm(rhs);
    }
  CHECK(std::sqrt(num / den) < 1e-4);
}

TEST_CASE("3D values and gradient match a radial quadrature oracle") {
  // for a radial source the outgoing solution reduces to 1D integrals:
  //   u(r)  = (e^{ikr} I1 + sin(kr) I2) / (kr)
  //   u'(r) = -u/r + (ik e^{ikr} I1 + k cos(kr) I2) / (kr)
  // with I1 = int_0^r sin(k rho) f rho drho, I2 = int_r^inf e^{ik rho} f rho drho
  double E = 1.5, k = std::sqrt(E), sigma = 0.12;
  Grid g = Grid::cube(3, 2.0, 64);
  auto f = gaussian_bump(g, sigma);
  HelmholtzConvolver conv(g, E, 0.95);
  SampledField u(g, 1), gx(g, 1), gy(g, 1), gz(g, 1);
  conv.apply(f.comp(0), u.comp(0), {gx.comp(0), gy.comp(0), gz.comp(0)});

  auto simpson = [](double a, double b, auto&& fn) {
    int n = 4000;
    double hs = (b - a) / n;
    cplx acc = fn(a) + fn(b);
    for (int i = 1; i < n; ++i) acc += double(i % 2 ? 4 : 2) * fn(a + i * hs);
    return acc * (hs / 3.0);
  };
  auto bump = [&](double rho) { return std::exp(-rho * rho / (2 * sigma * sigma)); };

  double umax = max_abs(u), gmax = std::max({max_abs(gx), max_abs(gy), max_abs(gz)});
  for (int ix : {2, 20, 33, 47, 58}) {
    int iy = (ix * 5) % g.n[1], iz = (ix * 11) % g.n[2];
    Pt x = g.point(ix, iy, iz);
    double r = norm(x);
    cplx I1 = simpson(0, r, [&](double rho) { return std::sin(k * rho) * bump(rho) * rho; });
    cplx I2 = simpson(r, r + 10 * sigma,
                      [&](double rho) { return std::exp(I * k * rho) * bump(rho) * rho; });
    cplx eikr = std::exp(I * k * r);
    cplx uw = (eikr * I1 + std::sin(k * r) * I2) / (k * r);
    cplx dw = -uw / r + (I * k * eikr * I1 + k * std::cos(k * r) * I2) / (k * r);
    CHECK(std::abs(u.a[g.index(ix, iy, iz)] - uw) < 1e-6 * umax);
    const cplx gv[3] = {gx.a[g.index(ix, iy, iz)], gy.a[g.index(ix, iy, iz)],
                        gz.a[g.index(ix, iy, iz)]};
    for (int d = 0; d < 3; ++d) CHECK(std::abs(gv[d] - dw * x[d] / r) < 1e-6 * gmax);
  }
}

TEST_CASE("far-zone values match the continuum kernel for a point-like source") {
  // narrow bump ~ delta: convolution should approach G(|x - x0|) * mass
  double E = 1.0;
  Grid g = Grid::cube(2, 2.0, 256);
  double sigma = 0.03;
  auto f = gaussian_bump(g, sigma);
  double mass = 0;
  for (auto& v : f.a) mass += v.real();
  mass *= g.h * g.h;
  auto u = volume_convolve(E, f);
  // check at radius 1.5 (far from the bump, inside the box)
  int ix = int((1.5 - g.lo[0]) / g.h - 0.5);
  Pt x = g.point(ix, g.n[1] / 2);
  cplx want = helmholtz_green(2, E, norm(x)) * mass;
  cplx got = u.a[g.index(ix, g.n[1] / 2)];
  CHECK(std::abs(got - want) / std::abs(want) < 5e-3);
}

TEST_CASE("margin violation refused") {
  Grid g = Grid::cube(2, 1.0, 64);
  SampledField f(g, 1);
  // support out at |x| ~ 0.9: margin rule demands support within 0.5
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    Pt x = g.point_of_index(i);
    double r = norm(x);
    if (std::abs(r - 0.9) < 0.05) f.a[i] = 1.0;
  }
  CHECK_THROWS_AS(volume_convolve(1.0, f), PreconditionError);
}

TEST_CASE("smooth sizes") {
  CHECK(next_smooth(66) == 70);
  CHECK(next_smooth(64) == 64);
  CHECK(next_smooth(97) == 98);
}
