#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scatlab/averaged.hpp"
#include "scatlab/forward.hpp"
#include "scatlab/potential.hpp"
#include "scatlab/sphere.hpp"
#include "scatlab/types.hpp"

namespace scatlab {

// ---------------------------------------------------------------------------
// interior pairing of two solutions at the same energy

// scalar field with an analytic gradient, evaluated at arbitrary points
struct PointField {
  std::function<cplx(const Pt&)> value;
  std::function<void(const Pt&, cplx*)> gradient;  // writes dim components
};

// total field of a partial-wave run as a point evaluator
PointField oracle_field(const PartialWaveResult& pw, const Pt& omega);

// Both sides of the pairing of two interior solutions,
//   volume   = Int_{B_R} (V1 - V2) phi1 conj(phi2)
//   boundary = Int_{dB_R} (conj(phi2) dnu phi1 - phi1 conj(dnu phi2)),
// equal when (H0 + Vj - E) phij = 0 (checked at probe points before
// integrating).  The volume side sums midpoint values on the grid, with
// cut-cell ball weights per well term so the jump spheres are resolved; the
// boundary side uses a spherical rule on the solution evaluators.  Their
// difference is the quadrature defect and shrinks at second order in h.
std::pair<cplx, cplx> green_identity_defect(const PotentialSpec& v1, const PotentialSpec& v2,
                                            const PointField& phi1, const PointField& phi2,
                                            double E, double R, const Grid& g);

// ---------------------------------------------------------------------------
// Dirichlet-to-Neumann maps of radial electric potentials

// radial profile together with its jump radii, so quadratures can split
// integration panels exactly at the discontinuities
struct RadialPotential {
  std::function<double(double)> V;
  std::vector<double> breaks;
  std::string name = "radial";
};

RadialPotential radial_well(double depth, double radius);
RadialPotential radial_free();

struct DtnMap {
  int dim = 3;
  double E = 0, R = 1;
  HarmonicBasis basis;
  Eigen::MatrixXcd lambda;  // pairing matrix over the basis, diagonal here

  cplx entry(int l) const;           // diagonal entry at degree l
  double selfadjoint_defect() const;  // max |lambda - lambda^H|
};

// Boundary map of the interior problem (H0 + V - E) u = 0 on B_R: per degree
// the regular radial solution gives the entry (d_r u_l / u_l)(R), the same
// for every m.  Refuses when u_l(R) is too small, i.e. E sits next to a
// Dirichlet eigenvalue of the ball.
DtnMap dtn_radial(const RadialPotential& V, double E, double R, int L, int dim = 3,
                  int nmesh = 4000);

// Max defect, over harmonic boundary data up to degree L, between
//   Int_{B_R} (V1 - V2) u1 conj(u2)   and   R^{n-1} (lambda1_l - lambda2_l),
// the two sides of the boundary-pairing identity for the interior Dirichlet
// solutions.  The volume side integrates the reduced radial solutions with
// Gauss panels split at the jump radii; the boundary side uses the map
// entries, so the sides share no quadrature.
double dtn_identity_defect(const RadialPotential& v1, const RadialPotential& v2, double E,
                           double R, int L, int dim = 3, int nmesh1 = 4000, int nmesh2 = 4000);

// ---------------------------------------------------------------------------
// complex-geometrical-optics solutions

struct CgoParameter {
  double E = 0, tau = 0;
  Pt xi{};                  // real frequency carried by the pair
  std::array<cplx, 3> p{};  // p . p = E (complex bilinear square)
};

// Paired parameters p1 = xi/2 + a e2 + i tau e3, p2 = -xi/2 + a e2 - i tau e3
// with a = sqrt(E + tau^2 - |xi|^2/4) and orthonormal e2, e3 perpendicular to
// xi, so that p . p = E, Re p1 - Re p2 = xi and Im p1 = -Im p2.  Three
// dimensions; refuses tau <= |xi|/2.
std::pair<CgoParameter, CgoParameter> cgo_parameters(const Pt& xi, double E, double tau);

// sharp restriction of a sampled scalar to the ball |x - center| < R
SampledField restrict_to_ball(const SampledField& f, double R, const Pt& center = {});

struct CgoOptions {
  double tol = 1e-10;
  int maxiter = 400;
  double eps_scale = 1.0;  // regularization eps = eps_scale E^{3/2} / tau
};

struct CgoRemainder {
  SampledField psi;
  double weighted_norm = 0;    // |psi| in L^2 with weight (1 + |x|^2)^{-1}
  double spectral_radius = 0;  // power-iteration estimate for G V
  double epsilon = 0;          // symbol shift actually used
  double reg_fraction = 0;     // share of |psi-hat|^2 within 10 eps of the variety
  bool reg_warning = false;    // set when that share exceeds 0.2
  int iterations = 0;
};

// Remainder of the exponential solution e^{i p . x}(1 + psi):
//   (Lap + 2 i p . grad) psi = V (1 + psi),
// solved spectrally on the periodic box.  The symbol -|z|^2 - 2 p . z is
// inverted as 1 / (m - i eps) with eps = eps_scale E^{3/2} / tau; bins where
// the symbol vanishes outright (the zero frequency always does) take the
// principal value zero of the odd local behaviour instead.  V is expected
// already truncated to its ball.  Refuses when the power-iteration estimate
// for the contraction G V reaches one.
CgoRemainder cgo_solve(const SampledField& V, const CgoParameter& p, const CgoOptions& opt = {});

// ---------------------------------------------------------------------------
// potential pairs and uniqueness experiments

// two potentials on one grid that agree outside the ball of radius R
struct ScenarioPair {
  std::string name1 = "first", name2 = "second";
  SampledField V1, V2;
  std::optional<SampledField> A1, A2;  // vector potentials, dim 3 only
  std::optional<SampledField> F1, F2;  // fields, reported in the norms
  double R = 1;
};

// max pointwise disagreement of the pair beyond radius R, over all stored
// components
double pair_annulus_defect(const ScenarioPair& pair);

// Pairing of the potential difference against averaged scattering solutions
// of the two potentials.  Electric pairs return
//   Int_{B_R} (V2 - V1) phi1_f conj(phi2_g);
// pairs with vector potentials return
//   i Int (A2 - A1) . (phi1_f grad conj(phi2_g) - conj(phi2_g) grad phi1_f)
//     + Int (A1^2 - A2^2 + V1 - V2) phi1_f conj(phi2_g).
// Either form equals (i/c) ((S2* (S2 - S1) f, g)), electric sign, resp.
// (i/c) ((S2* (S1 - S2) f, g)) with c = E^{(n-2)/2} / (2 (2 pi)^{n-1}); the
// scattering matrices supply the independent route to that number.  Refuses
// pairs that disagree on the annulus beyond R.
cplx orthogonality_functional(const ScenarioPair& pair, const DensityOnSphere& f,
                              const DensityOnSphere& g, double E, SolveOptions opt = {});

// the same pairing over all harmonics up to degree L: entry (a, b) pairs
// f = Y_a with g = Y_b
Eigen::MatrixXcd orthogonality_matrix(const ScenarioPair& pair, double E, int L,
                                      SolveOptions opt = {});

// the constant i/c multiplying the scattering-matrix side of the pairing
cplx pairing_constant(int dim, double E);

struct FourierOptions {
  double xi_max = 2;   // tensor grid of frequencies, |xi_d| <= xi_max
  double dxi = 1;      // grid spacing
  std::vector<double> tau;  // schedule; empty = {4, 8, 16, 32} sqrt(E)
  double stab_rel = 0.02;   // accepted once the last doubling moves less
  double stab_floor = 1e-8;
  CgoOptions cgo{};
};

struct FourierCoefficient {
  Pt xi{};
  cplx value{};
  double tau = 0;          // schedule point actually accepted
  double last_change = 0;  // relative move over the final doubling
  bool stabilized = false;
};

struct FourierDifference {
  std::vector<FourierCoefficient> coeff;
  SampledField difference;   // inverse transform of the coefficients
  double max_error = 0;      // pointwise against the sampled difference on B_R
  double rel_error = 0;      // max_error / max |difference|
  double epsilon = 0;        // regularization at the largest schedule point
  int flagged = 0;           // coefficients that never stabilized
};

// Scattering-difference coefficients Int (V2 - V1) phi1(p1) conj(phi2(p2))
// on a frequency grid, each taken at the first stable point of the tau
// schedule, then inverted to a reconstruction of V2 - V1.  Electric pairs
// in three dimensions only.
FourierDifference fourier_difference(const ScenarioPair& pair, double E,
                                     const FourierOptions& opt = {});

struct UniquenessReport {
  std::string name1, name2;
  double E = 0;
  int L = 0;
  double s_diff = 0;      // operator norm of S1 - S2, far-field route
  double s_diff_rep = 0;  // same via the representation route
  double unitarity1 = 0, unitarity2 = 0;
  double v_diff = 0;  // L^2(B_R) norm of V1 - V2
  double f_diff = 0;  // L^2(B_R) norm of F1 - F2, zero without fields
  Eigen::MatrixXcd functional;   // orthogonality pairing over harmonics
  double functional_defect = 0;  // relative defect against the S-matrix side
  double reconstruction_error = -1;  // relative, -1 when not run
  nlohmann::json manifest;

  bool finite() const;
};

struct ScenarioOptions {
  SolveOptions solve{};
  int functional_L = -1;  // harmonic cut for the pairing matrix; -1 = same L
  bool run_fourier = false;
  FourierOptions fourier{};
};

// Scattering matrices of both potentials by both routes, interior difference
// norms, and the orthogonality pairing matrix with its defect against the
// scattering side; optionally the Fourier reconstruction of the difference.
UniquenessReport scenario_uniqueness(const ScenarioPair& pair, double E, int L,
                                     const ScenarioOptions& opt = {});

// far-zone expansion terms plus a compactly supported smooth interior part
// for each potential of the pair
struct ExpansionScenario {
  ExpansionSpec far1, far2;
  PotentialSpec interior1, interior2;
  std::string name1 = "first", name2 = "second";
  double R = 1;  // agreement is asserted outside this radius
};

// Materializes both potentials (homogeneous far terms tapered to zero ahead
// of the box boundary, identical taper for both), verifies that they agree
// pointwise on the annulus beyond R, and hands the sampled pair to
// scenario_uniqueness.  Disagreement on the annulus refuses with the index
// of the first differing expansion term.
UniquenessReport expansion_pipeline(const ExpansionScenario& sc, double E, const Grid& g, int L,
                                    const ScenarioOptions& opt = {});

}  // namespace scatlab
