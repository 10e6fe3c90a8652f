#include "scatlab/magnetic.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "scatlab/fft.hpp"
#include "scatlab/operators.hpp"
#include "scatlab/sphere.hpp"

namespace scatlab {

namespace {

void quiet_gsl() {
  static bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

double call_fn(double s, void* p) { return (*static_cast<std::function<double(double)>*>(p))(s); }

// adaptive quadrature over [a, inf); the algebraic transform of qagiu
// integrates the declared decay tails exactly instead of truncating them
double integrate_tail(std::function<double(double)> f, double a) {
  quiet_gsl();
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(400);
  gsl_function gf{&call_fn, &f};
  double val = 0, err = 0;
  int rc = gsl_integration_qagiu(&gf, a, 1e-13, 1e-11, 400, ws, &val, &err);
  gsl_integration_workspace_free(ws);
  if (rc != 0) throw SolverError("ray quadrature for the vector potential failed");
  return val;
}

double integrate_finite(std::function<double(double)> f, double a, double b) {
  quiet_gsl();
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(400);
  gsl_function gf{&call_fn, &f};
  double val = 0, err = 0;
  int rc = gsl_integration_qag(&gf, a, b, 1e-13, 1e-11, 400, GSL_INTEG_GAUSS31, ws, &val, &err);
  gsl_integration_workspace_free(ws);
  if (rc != 0) throw SolverError("segment quadrature for the vector potential failed");
  return val;
}

Pt ray_moment(const PotentialSpec& spec, const Pt& x, double a, bool to_infinity,
              double b = 0) {
  Pt out{};
  for (int i = 0; i < 3; ++i) {
    auto f = [&spec, &x, i](double s) { return s * cross(x, spec.eval_B(s * x))[i]; };
    out[i] = to_infinity ? integrate_tail(f, a) : integrate_finite(f, a, b);
  }
  return out;
}

}  // namespace

double GaugeFunction::eval(const Pt& x) const {
  Pt d = x - center;
  return amplitude * std::exp(-dot(d, d) / (2 * sigma * sigma));
}

Pt GaugeFunction::grad(const Pt& x) const {
  Pt d = x - center;
  return (-eval(x) / (sigma * sigma)) * d;
}

DecayReport GaugeFunction::validate(int probes) const {
  if (probes < 8) throw PreconditionError("gauge validation: need at least 8 rays");
  if (!(mu > 0)) throw PreconditionError("gauge validation: mu must be positive");
  int degree = int(std::ceil(std::sqrt(double(probes))));
  DirectionGrid dirs = sphere_rule(3, degree);
  double rmax = 4 * (norm(center) + 1 + 3 * sigma);
  DecayReport rep;
  for (const auto& w : dirs.nodes) {
    for (int i = 1; i <= 24; ++i) {
      double r = rmax * i / 24.0;
      Pt x = r * w;
      double rv = std::abs(eval(x)) * std::pow(1 + r, mu) / C;
      double rg = norm(grad(x)) * std::pow(1 + r, 1 + mu) / C;
      rep.worst = std::max({rep.worst, rv, rg});
    }
  }
  rep.pass = rep.worst <= 1 + 1e-12;
  return rep;
}

SampledField curl(const SampledField& A) {
  const Grid& g = A.g;
  if (g.dim != 3 || A.ncomp != 3) throw PreconditionError("curl wants a 3-vector sample");
  if (A.role == FieldRole::Potential || A.role == FieldRole::MagneticField ||
      A.role == FieldRole::Wavefunction)
    throw PreconditionError("curl: input role is not a vector potential");
  SampledField F(g, 3, FieldRole::MagneticField);
  std::vector<cplx> da(g.npts()), db(g.npts());
  for (int c = 0; c < 3; ++c) {
    int i = (c + 1) % 3, j = (c + 2) % 3;
    spectral_derivative(g, A.comp(j), da.data(), i);
    spectral_derivative(g, A.comp(i), db.data(), j);
    for (std::int64_t p = 0; p < g.npts(); ++p) F.a[c * g.npts() + p] = da[p] - db[p];
  }
  return F;
}

double div_field(const SampledField& F) {
  if (F.g.dim != 3 || F.ncomp != 3) throw PreconditionError("div_field wants a field tensor");
  return max_abs(spectral_divergence(F));
}

double PotentialConstruction::eta(double r) const { return inner_ramp(r / (2 * R)); }

double PotentialConstruction::eta_deriv(double r) const {
  double t = r / (2 * R);
  if (t <= 0.2 || t >= 0.5) return 0;
  double s = (t - 0.2) / 0.3;
  return 30 * s * s * (1 - s) * (1 - s) / (0.6 * R);
}

Pt PotentialConstruction::a_reg(const Pt& x) const {
  if (norm(x) == 0) return {};
  return ray_moment(spec, x, 1.0, true);
}

Pt PotentialConstruction::a_inf(const Pt& x) const {
  if (norm(x) == 0) throw PreconditionError("homogeneous part is singular at the origin");
  return -1.0 * ray_moment(spec, x, 0.0, true);
}

namespace {

// great-circle arc of radius r from direction d0 to direction d1
double arc_integral(const PotentialConstruction& pc, Pt d0, Pt d1, double r) {
  double c = std::clamp(dot(d0, d1), -1.0, 1.0);
  double theta = std::acos(c);
  if (theta < 1e-14) return 0;
  Pt e = d1 - c * d0;
  if (norm(e) < 1e-12) {
    // antipodal: route through the axis least aligned with d0
    int k = 0;
    for (int d = 1; d < 3; ++d)
      if (std::abs(d0[d]) < std::abs(d0[k])) k = d;
    e = Pt{};
    e[k] = 1;
    e = e - dot(e, d0) * d0;
  }
  e = (1.0 / norm(e)) * e;
  static gsl_integration_glfixed_table* tab = gsl_integration_glfixed_table_alloc(32);
  double acc = 0;
  for (size_t q = 0; q < 32; ++q) {
    double th, w;
    gsl_integration_glfixed_point(0, theta, q, &th, &w, tab);
    Pt y = r * (std::cos(th) * d0 + std::sin(th) * e);
    Pt dy = r * (std::cos(th) * e - std::sin(th) * d0);
    acc += w * dot(pc.a_inf(y), dy);
  }
  return acc;
}

}  // namespace

double PotentialConstruction::u_contour(const Pt& x) const {
  double r = norm(x);
  if (r == 0) throw PreconditionError("contour potential undefined at the origin");
  // the radial leg from x0 to r * x0/|x0| integrates a tangential field along
  // its own ray and vanishes identically; only the arc contributes
  return arc_integral(*this, (1.0 / norm(x0)) * x0, (1.0 / r) * x, r);
}

double PotentialConstruction::u_contour_alt(const Pt& x) const {
  double r = norm(x);
  if (r == 0) throw PreconditionError("contour potential undefined at the origin");
  return arc_integral(*this, (1.0 / norm(x0)) * x0, (1.0 / r) * x, norm(x0));
}

Pt PotentialConstruction::a(const Pt& x) const {
  double r = norm(x);
  if (r >= R) return a_reg(x);
  double et = eta(r);
  if (et == 0) {
    // the two ray integrals collapse to minus the inner homotopy integral;
    // evaluating it directly avoids the 1/r cancellation
    return -1.0 * ray_moment(spec, x, 0.0, false, 1.0);
  }
  Pt out = a_reg(x) + (1 - et) * a_inf(x);
  double ed = eta_deriv(r);
  if (ed != 0) out = out - (u_contour(x) * ed / r) * x;
  return out;
}

SampledField PotentialConstruction::sample_a(const Grid& g) const {
  if (g.dim != 3) throw PreconditionError("vector potentials require dimension 3");
  SampledField A(g, 3, FieldRole::VectorPotential);
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    Pt v = a(g.point_of_index(i));
    for (int c = 0; c < 3; ++c) A.a[c * g.npts() + i] = v[c];
  }
  return A;
}

PotentialConstruction potential_from_field(const PotentialSpec& spec, double R, const Pt* base) {
  if (spec.dim != 3 || !spec.has_magnetic())
    throw PreconditionError("potential construction needs a three-dimensional field");
  if (!(spec.rho > 1))
    throw PreconditionError("declared decay too weak for the ray integrals to converge");
  if (!(R > 0)) throw PreconditionError("cutoff radius must be positive");

  // probe the closedness of F before trusting the contour potential
  DirectionGrid dirs = sphere_rule(3, 4);
  double scale = norm(spec.magnetic->center) + 3 * spec.magnetic->sigma;
  double fmax = 0, dmax = 0, h = 1e-4 * scale;
  for (const auto& w : dirs.nodes) {
    for (double f : {0.25, 0.6, 1.0, 1.6}) {
      Pt x = (f * scale) * w;
      fmax = std::max(fmax, norm(spec.eval_B(x)));
      double div = 0;
      for (int d = 0; d < 3; ++d) {
        Pt xp = x, xm = x;
        xp[d] += h;
        xm[d] -= h;
        div += (spec.eval_B(xp)[d] - spec.eval_B(xm)[d]) / (2 * h);
      }
      dmax = std::max(dmax, std::abs(div));
    }
  }
  if (dmax * spec.magnetic->sigma > 1e-6 * std::max(fmax, 1e-30))
    throw PreconditionError("field is not closed: contour potential would be path dependent");

  PotentialConstruction pc;
  pc.spec = spec;
  pc.R = R;
  pc.x0 = base ? *base : Pt{R, 0, 0};
  if (norm(pc.x0) == 0) throw PreconditionError("base point must avoid the origin");
  return pc;
}

SampledField gauge_transform(const SampledField& A, const GaugeFunction& psi) {
  const Grid& g = A.g;
  if (g.dim != 3 || A.ncomp != 3) throw PreconditionError("gauge shift wants a 3-vector sample");
  SampledField out = A;
  out.role = FieldRole::VectorPotential;
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    Pt gp = psi.grad(g.point_of_index(i));
    for (int c = 0; c < 3; ++c) out.a[c * g.npts() + i] += gp[c];
  }
  return out;
}

}  // namespace scatlab
