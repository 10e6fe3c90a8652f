#pragma once

#include "scatlab/potential.hpp"
#include "scatlab/types.hpp"

namespace scatlab {

// Decaying scalar used to shift the vector potential without changing the
// field: A -> A + grad psi.
struct GaugeFunction {
  double amplitude = 0, sigma = 1;
  Pt center{};
  double mu = 1, C = 1;  // declared decay of psi and (1+r) * grad psi

  double eval(const Pt& x) const;
  Pt grad(const Pt& x) const;
  DecayReport validate(int probes) const;
};

// spectral curl of a 3-vector sample; the antisymmetric result is stored as
// the axial triple (F23, F31, F12)
SampledField curl(const SampledField& A);

// closedness defect: max norm of d1 F23 + d2 F31 + d3 F12
double div_field(const SampledField& F);

// The three-piece construction of a vector potential from its field: a ray
// integral to infinity (regular part), the opposite ray integral through the
// origin (homogeneous part), and a contour potential for the latter, glued
// with a cutoff so A equals the regular part outside radius R.
struct PotentialConstruction {
  PotentialSpec spec;
  double R = 1;
  Pt x0{};

  Pt a_reg(const Pt& x) const;
  Pt a_inf(const Pt& x) const;
  double u_contour(const Pt& x) const;      // radial leg, then arc at radius |x|
  double u_contour_alt(const Pt& x) const;  // arc at radius |x0|, then radial leg
  double eta(double r) const;
  double eta_deriv(double r) const;
  Pt a(const Pt& x) const;
  SampledField sample_a(const Grid& g) const;
};

PotentialConstruction potential_from_field(const PotentialSpec& spec, double R,
                                           const Pt* base = nullptr);

SampledField gauge_transform(const SampledField& A, const GaugeFunction& psi);

// Operator-norm distance between the scattering matrices with and without
// the gauge shift, in the harmonic basis up to degree L.  Defined with the
// forward solver.
double gauge_invariance_defect(const SampledField& V, const SampledField* A,
                               const GaugeFunction& psi, double E, int L);

}  // namespace scatlab
