#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "scatlab/green.hpp"
#include "scatlab/potential.hpp"
#include "scatlab/sphere.hpp"
#include "scatlab/types.hpp"

namespace scatlab {

// far-field matrix sampled on a direction grid: row = outgoing direction nu,
// column = incident direction omega
struct FarField {
  int dim = 2;
  double E = 0;
  DirectionGrid dirs;
  Eigen::MatrixXcd f;

  // || f(nu, omega) - f(-omega, -nu) || over antipode-closed grids
  double reciprocity_defect() const;
};

struct ScatteringMatrix {
  HarmonicBasis basis;
  double E = 0;
  Eigen::MatrixXcd S;

  double unitarity_defect() const;  // spectral norm of S^H S - I
};

// incident field with an analytic gradient, so the solver never
// differentiates the data numerically
struct IncidentField {
  std::function<cplx(const Pt&)> value;
  std::function<void(const Pt&, cplx*)> gradient;  // writes dim components
};

IncidentField plane_wave(int dim, double E, const Pt& omega);
IncidentField green_pole(int dim, double E, const Pt& y);

struct SolveOptions {
  double tol = 1e-8;
  int restart = 60;
  int maxiter = 3000;
  bool dense_direct = false;  // dense LU of the support-restricted system
  double cond_cap = 1e10;     // refuse above this (near-resonant interior)
};

struct ScatteringSolution {
  Pt omega{};
  double E = 0;
  SampledField phi;       // total field
  SampledField grad;      // dim components
  double residual = 0;    // relative residual of the integral equation
  double cond_monitor = 0;
  int iterations = 0;
};

// phi = phi_inc - G_E * (Q phi) solved for q = Q phi on the support cells of
// the sampled potentials; the convolver returns (G q, grad G q) in one pass,
// which carries the gradient unknown exactly (Q reads grad phi through the
// 2iA.grad term).  Iterations use a convolver whose evaluation window is
// shrunk to the support; one full-box pass materializes the field at the end.
class LippmannSchwinger {
 public:
  LippmannSchwinger(const SampledField& V, const SampledField* A, double E,
                    SolveOptions opt = {});

  ScatteringSolution solve(const IncidentField& inc, const Pt& omega_tag = {}) const;

  // far-field coefficient of an already-solved field, nu a unit vector
  cplx far_coeff(const ScatteringSolution& sol, const Pt& nu) const;

  const Grid& grid() const { return g_; }
  double energy() const { return E_; }
  int dim() const { return g_.dim; }
  double support_half() const { return supp_half_; }
  const std::vector<std::int64_t>& support_cells() const { return supp_; }

  // q = Q phi restricted to the support cells, for quadratures against the
  // perturbation (far fields, representation inner products)
  Eigen::VectorXcd q_of(const ScatteringSolution& sol) const;

  // a-posteriori check that the returned fields satisfy the equation:
  // relative residual of (I + Q G) q - Q phi_inc with q recomputed from
  // sol.phi and sol.grad
  double equation_residual(const ScatteringSolution& sol, const IncidentField& inc) const;

 private:
  Eigen::VectorXcd apply_op(const Eigen::VectorXcd& q) const;
  Eigen::VectorXcd rhs_of(const IncidentField& inc) const;

  Grid g_;
  double E_ = 0, k_ = 0;
  SolveOptions opt_;
  double supp_half_ = 0;
  std::vector<std::int64_t> supp_;       // indices of support cells
  std::vector<cplx> coef_v_;             // V + i DivA + A^2 on support
  std::vector<cplx> coef_a_[3];          // 2iA components on support
  bool has_a_ = false;
  std::unique_ptr<HelmholtzConvolver> conv_supp_;  // eval window = support
  std::unique_ptr<HelmholtzConvolver> conv_full_;
  mutable std::vector<cplx> scratch_;
};

// one solve per incident node; solves for distinct nodes run in parallel
FarField far_field(const SampledField& V, const SampledField* A, double E,
                   const DirectionGrid& dirs, SolveOptions opt = {});

// S = I + i e^{i pi (n-3)/4} E^{(n-1)/4} (2 pi)^{-(n-1)/2} K in the harmonic
// basis up to degree L, K the quadrature discretization of the kernel f
ScatteringMatrix smatrix_from_farfield(const FarField& ff, int L);

// (T0 phi)(omega) = 2^{-1/2} E^{(n-2)/4} (2 pi)^{-n/2} Int e^{-ik x.omega} phi dx,
// projected onto harmonics up to degree L
Eigen::VectorXcd trace_T0(double E, const SampledField& phi, const DirectionGrid& dirs, int L);

// reduced radial solution w on [r0, rmax] of w'' + (E - V - q/r^2) w = 0,
// q = l(l+1) resp. m^2 - 1/4, regular branch at the origin; w and w' are
// stored on a uniform mesh and interpolated with cubic Hermite polynomials
struct RadialSolution {
  double r0 = 0, rmax = 0, hm = 0;
  std::vector<double> w, wp;

  double value(double r) const;
  double deriv(double r) const;
};

RadialSolution radial_regular(const std::function<double(double)>& V, int dim, int l,
                              double E, double rmax, int nmesh = 2000);

struct PartialWaveResult {
  int dim = 3;
  double E = 0, k = 0, a = 0;     // a = support radius used for matching
  std::vector<double> delta;      // index l (3D) or |m| (2D)
  std::vector<RadialSolution> radial;
  std::vector<cplx> match;        // inside-solution scale factors
  double tail = 0;                // |delta| at the truncation order
  bool converged = false;         // tail <= 1e-12

  cplx smat_entry(int l) const;               // e^{2 i delta_l}
  cplx far_amplitude(double cosang) const;    // f as a function of nu.omega
  cplx total_field(const Pt& x, const Pt& omega) const;
  void total_gradient(const Pt& x, const Pt& omega, cplx* out) const;

  FarField far_matrix(const DirectionGrid& dirs) const;
  ScatteringMatrix smatrix(int L) const;
};

// independent oracle for radial electric potentials compactly supported in
// r < a: integrates the radial equation per order and matches log-derivatives
// to the free regular/irregular pair at r = a
PartialWaveResult partialwave_oracle(const PotentialSpec& spec, double E, int lmax);

// run fn(i) for i in [0, n) on a small thread pool; each index writes only
// its own slot, so results do not depend on the schedule
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace scatlab
