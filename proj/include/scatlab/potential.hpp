#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scatlab/types.hpp"

namespace scatlab {

// One radial building block of the electric part.  Families:
//   gaussian     amplitude * exp(-|x-c|^2 / (2 sigma^2))
//   well         amplitude inside |x-c| < radius, zero outside
//   bump         amplitude * exp(1 - 1/(1 - (r/radius)^2)), compactly supported
//   homogeneous  amplitude * eta(r/R) * r^-order * real harmonic (l, m)
//   table        piecewise-linear radial profile, zero beyond the last knot
struct ElectricTerm {
  std::string family;
  double amplitude = 0;
  double sigma = 1;
  double radius = 1;
  double order = 0;
  int l = 0, m = 0;
  Pt center{};
  std::vector<double> table_r, table_v;
};

// Magnetic field as the curl of a gaussian-enveloped constant vector, which
// is divergence free by construction.
struct MagneticSpec {
  std::string family;  // curl_gaussian
  Pt amplitude{}, center{};
  double sigma = 1;
};

struct DecayReport {
  bool pass = false;
  double worst = 0;  // max of |V|(1+r)^rho / C over all probe points
};

struct PotentialSpec {
  int dim = 3;
  std::vector<ElectricTerm> electric;
  std::optional<MagneticSpec> magnetic;
  double rho = 2, C = 1, R = 1;

  static PotentialSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  double eval_V(const Pt& x) const;
  // axial vector (F23, F31, F12) of the field tensor
  Pt eval_B(const Pt& x) const;
  bool has_magnetic() const { return magnetic.has_value(); }
};

// smooth ramp used to cut homogeneous profiles away from the origin:
// 0 for t <= 0.2, 1 for t >= 0.5, quintic in between
double inner_ramp(double t);

// real-valued orthonormal harmonic on the unit circle / sphere
double real_harmonic(int dim, int l, int m, const Pt& xhat);

DecayReport validate_decay(const PotentialSpec& spec, int probes);

SampledField sample_potential(const PotentialSpec& spec, const Grid& g);
SampledField sample_field(const PotentialSpec& spec, const Grid& g);

// A finite list of homogeneous far-zone terms, electric or magnetic.
struct ExpansionTerm {
  bool magnetic = false;
  double order = 0;
  int l = 0, m = 0;
  double coeff = 0;
};

struct ExpansionSpec {
  std::vector<ExpansionTerm> terms;
  bool finite_sum = true;

  static ExpansionSpec from_json(const nlohmann::json& j);
  void validate() const;  // orders increasing; electric > 1, magnetic > 2
};

}  // namespace scatlab
