#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include <algorithm>

#include "scatlab/forward.hpp"
#include "scatlab/special.hpp"

namespace scatlab {

using Eigen::MatrixXcd;

namespace {

void quiet_gsl() {
  static bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

struct RadialRhs {
  const std::function<double(double)>* V;
  double E, q;
};

int radial_rhs(double r, const double y[], double dydr[], void* params) {
  auto* p = static_cast<RadialRhs*>(params);
  dydr[0] = y[1];
  dydr[1] = (p->q / (r * r) + (*p->V)(r)-p->E) * y[0];
  return GSL_SUCCESS;
}

}  // namespace

double RadialSolution::value(double r) const {
  if (r <= r0) return w.front();
  if (r >= rmax) return w.back();
  int i = std::min(int((r - r0) / hm), int(w.size()) - 2);
  double t = (r - (r0 + i * hm)) / hm;
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * w[std::size_t(i)] + hm * h10 * wp[std::size_t(i)] + h01 * w[std::size_t(i) + 1] +
         hm * h11 * wp[std::size_t(i) + 1];
}

double RadialSolution::deriv(double r) const {
  if (r <= r0) return wp.front();
  if (r >= rmax) return wp.back();
  int i = std::min(int((r - r0) / hm), int(w.size()) - 2);
  double t = (r - (r0 + i * hm)) / hm;
  double d00 = 6 * t * (t - 1), d10 = (1 - t) * (1 - 3 * t);
  double d01 = 6 * t * (1 - t), d11 = t * (3 * t - 2);
  return d00 / hm * w[std::size_t(i)] + d10 * wp[std::size_t(i)] + d01 / hm * w[std::size_t(i) + 1] +
         d11 * wp[std::size_t(i) + 1];
}

RadialSolution radial_regular(const std::function<double(double)>& V, int dim, int l, double E,
                              double rmax, int nmesh) {
  if (dim != 2 && dim != 3) throw PreconditionError("radial_regular: dim must be 2 or 3");
  if (l < 0 || rmax <= 0 || nmesh < 8) throw PreconditionError("radial_regular: bad parameters");

  double q = dim == 3 ? double(l) * (l + 1) : double(l) * l - 0.25;
  double p = dim == 3 ? double(l + 1) : l + 0.5;  // w ~ r^p at the origin
  // start far enough in that the series tail is negligible, but not so deep
  // that the centrifugal growth (r/r0)^p overflows on the way out
  double r0 = rmax * std::max(1e-6, std::pow(10.0, -220.0 / std::max(p, 1.0)));

  RadialSolution sol;
  sol.r0 = r0;
  sol.rmax = rmax;
  sol.hm = (rmax - r0) / nmesh;
  sol.w.resize(std::size_t(nmesh) + 1);
  sol.wp.resize(std::size_t(nmesh) + 1);

  quiet_gsl();
  RadialRhs par{&V, E, q};
  gsl_odeiv2_system sys{radial_rhs, nullptr, 2, &par};
  gsl_odeiv2_driver* drv =
      gsl_odeiv2_driver_alloc_y_new(&sys, gsl_odeiv2_step_rk8pd, sol.hm / 8, 1e-300, 1e-12);

  double y[2] = {1.0, p / r0};
  sol.w[0] = y[0];
  sol.wp[0] = y[1];
  double r = r0;
  for (int i = 1; i <= nmesh; ++i) {
    double target = r0 + i * sol.hm;
    int rc = gsl_odeiv2_driver_apply(drv, &r, target, y);
    if (rc != GSL_SUCCESS) {
      gsl_odeiv2_driver_free(drv);
      throw SolverError("radial integration failed (gsl rc " + std::to_string(rc) + ")");
    }
    if (std::abs(y[0]) > 1e250 || std::abs(y[1]) > 1e250) {
      double s = 1.0 / std::max(std::abs(y[0]), std::abs(y[1]));
      y[0] *= s;
      y[1] *= s;
      for (int j = 0; j < i; ++j) {
        sol.w[std::size_t(j)] *= s;
        sol.wp[std::size_t(j)] *= s;
      }
      gsl_odeiv2_driver_reset(drv);
    }
    sol.w[std::size_t(i)] = y[0];
    sol.wp[std::size_t(i)] = y[1];
  }
  gsl_odeiv2_driver_free(drv);

  double scale = 0;
  for (double v : sol.w) scale = std::max(scale, std::abs(v));
  if (scale > 0)
    for (std::size_t i = 0; i < sol.w.size(); ++i) {
      sol.w[i] /= scale;
      sol.wp[i] /= scale;
    }
  return sol;
}

// ---------------------------------------------------------------------------
// partial-wave oracle

namespace {

cplx reg_wave(int dim, int l, double z) { return radial_wave(dim, l, RadialKind::Regular, z); }
cplx irr_wave(int dim, int l, double z) { return radial_wave(dim, l, RadialKind::Irregular, z); }
cplx reg_wave_d(int dim, int l, double z) {
  return radial_wave_deriv(dim, l, RadialKind::Regular, z);
}
cplx irr_wave_d(int dim, int l, double z) {
  return radial_wave_deriv(dim, l, RadialKind::Irregular, z);
}

// outside radial factor e^{i delta} (cos(delta) reg - sin(delta) irr)
cplx outside_radial(int dim, int l, double delta, double z) {
  cplx e = std::exp(I * delta);
  return e * (std::cos(delta) * reg_wave(dim, l, z) - std::sin(delta) * irr_wave(dim, l, z));
}

cplx outside_radial_d(int dim, int l, double delta, double k, double z) {
  cplx e = std::exp(I * delta);
  return e * k * (std::cos(delta) * reg_wave_d(dim, l, z) - std::sin(delta) * irr_wave_d(dim, l, z));
}

}  // namespace

PartialWaveResult partialwave_oracle(const PotentialSpec& spec, double E, int lmax) {
  if (E <= 0) throw PreconditionError("partialwave_oracle: energy must be positive");
  if (lmax < 0) throw PreconditionError("partialwave_oracle: lmax must be >= 0");
  if (spec.has_magnetic())
    throw PreconditionError("partialwave_oracle: magnetic potentials are out of scope");

  double a = 0;
  for (const auto& t : spec.electric) {
    if (norm(t.center) > 0)
      throw PreconditionError("partialwave_oracle: potential must be centered at the origin");
    if (t.family == "well" || t.family == "bump")
      a = std::max(a, t.radius);
    else if (t.family == "table")
      a = std::max(a, t.table_r.back());
    else
      throw PreconditionError("partialwave_oracle: family '" + t.family +
                              "' is not compactly supported");
  }
  if (a <= 0) a = 1;

  PartialWaveResult res;
  res.dim = spec.dim;
  res.E = E;
  res.k = std::sqrt(E);
  res.a = a;
  const int dim = spec.dim;
  const double k = res.k;
  const double p = dim == 3 ? 1.0 : 0.5;  // u = w / r^p

  auto vr = [&spec, dim](double r) {
    return spec.eval_V(dim == 3 ? Pt{r, 0, 0} : Pt{r, 0});
  };

  res.delta.resize(std::size_t(lmax) + 1);
  res.radial.resize(std::size_t(lmax) + 1);
  res.match.resize(std::size_t(lmax) + 1);
  for (int l = 0; l <= lmax; ++l) {
    RadialSolution w = radial_regular(vr, dim, l, E, a);
    double gamma = w.wp.back() / w.w.back() - p / a;
    double ka = k * a;
    double num = k * reg_wave_d(dim, l, ka).real() - gamma * reg_wave(dim, l, ka).real();
    double den = k * irr_wave_d(dim, l, ka).real() - gamma * irr_wave(dim, l, ka).real();
    double delta = std::atan2(num, den);
    res.delta[std::size_t(l)] = delta;
    cplx rout = outside_radial(dim, l, delta, ka);
    res.match[std::size_t(l)] = rout * std::pow(a, p) / w.w.back();
    res.radial[std::size_t(l)] = std::move(w);
  }
  res.tail = std::abs(res.delta.back());
  res.converged = res.tail <= 1e-12;
  return res;
}

cplx PartialWaveResult::smat_entry(int l) const {
  if (l < 0 || l >= int(delta.size()))
    throw PreconditionError("smat_entry: order beyond the computed phase shifts");
  return std::exp(2.0 * I * delta[std::size_t(l)]);
}

cplx PartialWaveResult::far_amplitude(double cosang) const {
  cosang = std::clamp(cosang, -1.0, 1.0);
  cplx acc = 0;
  int lmax = int(delta.size()) - 1;
  if (dim == 3) {
    for (int l = 0; l <= lmax; ++l) {
      cplx t = (smat_entry(l) - 1.0) / (2.0 * I);  // e^{i delta} sin(delta)
      acc += (2.0 * l + 1.0) * t * sf::legendre_P(l, cosang);
    }
    return acc / k;
  }
  // cos(m dth) by Chebyshev recurrence in cos(dth)
  double c0 = 1, c1 = cosang;
  for (int m = 0; m <= lmax; ++m) {
    double cm = m == 0 ? 1 : (m == 1 ? c1 : 2 * cosang * c1 - c0);
    if (m >= 2) {
      c0 = c1;
      c1 = cm;
    }
    cplx t = (smat_entry(m) - 1.0) / 2.0;
    acc += (m == 0 ? 1.0 : 2.0) * t * cm;
  }
  return std::sqrt(2.0 / (PI * k)) * std::exp(-I * (PI / 4)) * acc;
}

namespace {

// radial factor (value, d/dr) of order l at radius r for a matched solution
void pw_radial(const PartialWaveResult& pw, int l, double r, cplx& val, cplx& der) {
  const double p = pw.dim == 3 ? 1.0 : 0.5;
  if (r >= pw.a) {
    val = outside_radial(pw.dim, l, pw.delta[std::size_t(l)], pw.k * r);
    der = outside_radial_d(pw.dim, l, pw.delta[std::size_t(l)], pw.k, pw.k * r);
    return;
  }
  const RadialSolution& w = pw.radial[std::size_t(l)];
  double rr = std::max(r, w.r0);
  double wv = w.value(rr), wd = w.deriv(rr);
  double rp = std::pow(rr, p);
  val = pw.match[std::size_t(l)] * wv / rp;
  der = pw.match[std::size_t(l)] * (wd / rp - p * wv / (rp * rr));
  if (r < w.r0) {
    // below the integration start the radial factor is the power law r^l
    double fac = std::pow(r / w.r0, double(l));
    der = r > 0 ? val * (double(l) / r) * fac : (l == 1 ? val / w.r0 : cplx(0));
    val *= fac;
  }
}

}  // namespace

cplx PartialWaveResult::total_field(const Pt& x, const Pt& omega) const {
  double r = norm(x);
  double ca = r > 0 ? std::clamp(dot(x, omega) / (r * norm(omega)), -1.0, 1.0) : 1.0;
  cplx acc = 0, val, der;
  int lmax = int(delta.size()) - 1;
  if (dim == 3) {
    for (int l = 0; l <= lmax; ++l) {
      pw_radial(*this, l, r, val, der);
      cplx il = std::pow(I, l);
      acc += (2.0 * l + 1.0) * il * val * sf::legendre_P(l, ca);
    }
    return acc;
  }
  double c0 = 1, c1 = ca;
  for (int m = 0; m <= lmax; ++m) {
    double cm = m == 0 ? 1 : (m == 1 ? c1 : 2 * ca * c1 - c0);
    if (m >= 2) {
      c0 = c1;
      c1 = cm;
    }
    pw_radial(*this, m, r, val, der);
    acc += (m == 0 ? 1.0 : 2.0) * std::pow(I, m) * val * cm;
  }
  return acc;
}

void PartialWaveResult::total_gradient(const Pt& x, const Pt& omega, cplx* out) const {
  double r = norm(x);
  Pt what = (1.0 / norm(omega)) * omega;
  int lmax = int(delta.size()) - 1;
  for (int d = 0; d < dim; ++d) out[d] = 0;
  if (r < 1e-12) {
    // at the center only the first-order term carries a gradient
    if (lmax < 1) return;
    cplx val, der;
    double rr = std::max(radial[1].r0, 1e-12);
    pw_radial(*this, 1, rr, val, der);
    cplx slope = val / rr;
    cplx c = dim == 3 ? 3.0 * I * slope : 2.0 * I * slope;
    for (int d = 0; d < dim; ++d) out[d] = c * what[d];
    return;
  }
  Pt xhat = (1.0 / r) * x;
  double ca = std::clamp(dot(xhat, what), -1.0, 1.0);
  cplx val, der;
  // gradient of c_l R_l(r) P_l(x.omega / r):
  //   R_l' P_l xhat + R_l P_l' (omega - ca xhat) / r
  auto add = [&](cplx coeff, double ang, double angd) {
    for (int d = 0; d < dim; ++d)
      out[d] += coeff * (der * ang * xhat[d] + val * angd * (what[d] - ca * xhat[d]) / r);
  };
  if (dim == 3) {
    double p0 = 1, p1 = ca, q0 = 0, q1 = 1;  // P_l and P_l'
    for (int l = 0; l <= lmax; ++l) {
      double pl = l == 0 ? 1 : (l == 1 ? ca : ((2 * l - 1) * ca * p1 - (l - 1) * p0) / l);
      double ql = l == 0 ? 0 : (l == 1 ? 1 : q0 + (2 * l - 1) * p1);
      if (l >= 2) {
        q0 = q1;
        q1 = ql;
        p0 = p1;
        p1 = pl;
      }
      pw_radial(*this, l, r, val, der);
      add((2.0 * l + 1.0) * std::pow(I, l), pl, ql);
    }
    return;
  }
  // cos(m dth) = T_m(ca), T_m' = m U_{m-1}
  double c0 = 1, c1 = ca, u0 = 1, u1 = 2 * ca;
  for (int m = 0; m <= lmax; ++m) {
    double cm = m == 0 ? 1 : (m == 1 ? c1 : 2 * ca * c1 - c0);
    double um1 = m == 0 ? 0 : (m == 1 ? u0 : (m == 2 ? u1 : 2 * ca * u1 - u0));
    if (m >= 2) {
      c0 = c1;
      c1 = cm;
    }
    if (m >= 3) {
      u0 = u1;
      u1 = um1;
    }
    pw_radial(*this, m, r, val, der);
    add((m == 0 ? 1.0 : 2.0) * std::pow(I, m), cm, m * um1);
  }
}

FarField PartialWaveResult::far_matrix(const DirectionGrid& dirs) const {
  if (dirs.dim != dim) throw PreconditionError("far_matrix: direction grid dimension mismatch");
  FarField ff;
  ff.dim = dim;
  ff.E = E;
  ff.dirs = dirs;
  ff.f = MatrixXcd(dirs.size(), dirs.size());
  for (int i = 0; i < dirs.size(); ++i)
    for (int j = 0; j < dirs.size(); ++j)
      ff.f(i, j) = far_amplitude(dot(dirs.nodes[i], dirs.nodes[j]));
  return ff;
}

ScatteringMatrix PartialWaveResult::smatrix(int L) const {
  if (L >= int(delta.size()))
    throw PreconditionError("smatrix: requested degree exceeds the computed phase shifts");
  HarmonicBasis basis{dim, L};
  ScatteringMatrix sm;
  sm.basis = basis;
  sm.E = E;
  sm.S = MatrixXcd::Zero(basis.size(), basis.size());
  for (int i = 0; i < basis.size(); ++i) sm.S(i, i) = smat_entry(basis.l_of(i));
  return sm;
}


}  // namespace scatlab
