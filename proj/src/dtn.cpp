#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "scatlab/forward.hpp"
#include "scatlab/inverse.hpp"

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

double integrate_finite(std::function<double(double)> f, double a, double b) {
  quiet_gsl();
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(400);
  gsl_function gf{&call_fn, &f};
  double val = 0, err = 0;
  int rc = gsl_integration_qag(&gf, a, b, 1e-13, 1e-11, 400, GSL_INTEG_GAUSS31, ws, &val, &err);
  gsl_integration_workspace_free(ws);
  if (rc != 0) throw SolverError("radial pairing quadrature failed");
  return val;
}

// reduced radial solution on [0, R] and the boundary log-derivative of the
// unreduced one; radial_regular scales max |w| to one, which cancels in
// every ratio taken here
struct RadialEntry {
  RadialSolution w;
  double lambda = 0;  // (d_r u_l / u_l)(R)
};

RadialEntry radial_entry(const RadialPotential& V, double E, double R, int l, int dim,
                         int nmesh) {
  RadialEntry e;
  e.w = radial_regular(V.V, dim, l, E, R, nmesh);
  double wR = e.w.w.back();
  double mx = 0;
  for (double v : e.w.w) mx = std::max(mx, std::abs(v));
  if (std::abs(wR) < 1e-6 * mx)
    throw PreconditionError("interior solution vanishes at r = R (Dirichlet eigenvalue next to E); choose a different radius R or energy");
  double p = dim == 3 ? 1.0 : 0.5;  // u = w / r^p
  e.lambda = e.w.wp.back() / wR - p / R;
  return e;
}

// panel endpoints: the jump radii of both profiles, clipped to (0, R)
std::vector<double> panel_points(const RadialPotential& v1, const RadialPotential& v2,
                                 double R) {
  std::vector<double> pts{0.0, R};
  for (const auto* v : {&v1, &v2})
    for (double b : v->breaks)
      if (b > 0 && b < R) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

RadialPotential radial_well(double depth, double radius) {
  RadialPotential v;
  v.V = [depth, radius](double r) { return r < radius ? depth : 0.0; };
  v.breaks = {radius};
  v.name = "well";
  return v;
}

RadialPotential radial_free() {
  RadialPotential v;
  v.V = [](double) { return 0.0; };
  v.name = "free";
  return v;
}

cplx DtnMap::entry(int l) const {
  int idx = basis.dim == 2 ? basis.index_of(0, l) : basis.index_of(l, 0);
  return lambda(idx, idx);
}

double DtnMap::selfadjoint_defect() const {
  return (lambda - lambda.adjoint()).cwiseAbs().maxCoeff();
}

DtnMap dtn_radial(const RadialPotential& V, double E, double R, int L, int dim, int nmesh) {
  if (R <= 0 || L < 0) throw PreconditionError("dtn_radial needs R > 0 and L >= 0");
  DtnMap map;
  map.dim = dim;
  map.E = E;
  map.R = R;
  map.basis = HarmonicBasis{dim, L};
  int nb = map.basis.size();
  map.lambda = Eigen::MatrixXcd::Zero(nb, nb);
  std::vector<double> lam(std::size_t(L) + 1, 0.0);
  for (int l = 0; l <= L; ++l) lam[std::size_t(l)] = radial_entry(V, E, R, l, dim, nmesh).lambda;
  for (int i = 0; i < nb; ++i) map.lambda(i, i) = lam[std::size_t(map.basis.l_of(i))];
  return map;
}

double dtn_identity_defect(const RadialPotential& v1, const RadialPotential& v2, double E,
                           double R, int L, int dim, int nmesh1, int nmesh2) {
  if (R <= 0 || L < 0) throw PreconditionError("dtn_identity_defect needs R > 0 and L >= 0");
  auto pts = panel_points(v1, v2, R);
  double pm = dim == 3 ? 2.0 : 1.0;  // r^{n-1} scale carried by the reduced product
  double defect = 0;
  for (int l = 0; l <= L; ++l) {
    auto e1 = radial_entry(v1, E, R, l, dim, nmesh1);
    auto e2 = radial_entry(v2, E, R, l, dim, nmesh2);
    // u1 u2 r^{n-1} = w1 w2, so the volume side reduces to a line integral
    auto f = [&](double r) { return (v1.V(r) - v2.V(r)) * e1.w.value(r) * e2.w.value(r); };
    double vol = 0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) vol += integrate_finite(f, pts[j], pts[j + 1]);
    double lhs = std::pow(R, pm) * vol / (e1.w.w.back() * e2.w.w.back());
    double rhs = std::pow(R, pm) * (e1.lambda - e2.lambda);
    defect = std::max(defect, std::abs(lhs - rhs));
  }
  return defect;
}

}  // namespace scatlab
