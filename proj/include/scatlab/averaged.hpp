#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scatlab/forward.hpp"
#include "scatlab/sphere.hpp"
#include "scatlab/types.hpp"

namespace scatlab {

// density on S^{n-1} expanded in the orthonormal harmonic basis up to degree
// L; Parseval makes the coefficient norm the L^2 norm of the density
struct DensityOnSphere {
  int dim = 2;
  int L = 0;
  Eigen::VectorXcd coef;  // HarmonicBasis{dim, L} ordering

  double norm() const { return coef.norm(); }
  Eigen::VectorXcd node_values(const DirectionGrid& dirs) const;
};

// superposition of plane waves from node values of a density:
// phi(x) = sum_q w_q fvals[q] e^{ik x.omega_q}
SampledField herglotz_nodes(const Eigen::VectorXcd& fvals, double E, const Grid& g,
                            const DirectionGrid& dirs);

// phi_{0,f}(x) = Int e^{ik x.omega} f(omega) domega by sphere quadrature; an
// entire solution of the free equation at energy E.  Refuses quadratures of
// degree below f.L; the overload without a rule picks one that resolves both
// the density degree and the phase oscillation across the grid box.
SampledField herglotz(const DensityOnSphere& f, double E, const Grid& g,
                      const DirectionGrid& dirs);
SampledField herglotz(const DensityOnSphere& f, double E, const Grid& g);

// phi_{+,f} = sum_q w_q f(omega_q) phi_+(., omega_q): scattering solutions
// averaged over the incident direction against f; one solve per node
SampledField averaged_solution(const SampledField& V, const SampledField* A,
                               const DensityOnSphere& f, double E, const DirectionGrid& dirs,
                               SolveOptions opt = {});
SampledField averaged_solution(const SampledField& V, const SampledField* A,
                               const DensityOnSphere& f, double E, SolveOptions opt = {});

// sesquilinear route to the scattering matrix:
//   (S f, g) = (f, g) - i E^{(n-2)/2} / (2 (2 pi)^{n-1}) (Q phi_{+,f}, phi_{0,g})
// assembled over harmonic basis pairs up to degree L; independent of the
// far-field amplitude path, so agreement between the two is a real check
ScatteringMatrix smatrix_via_representation(const SampledField& V, const SampledField* A,
                                            double E, int L, SolveOptions opt = {});

struct Ball {
  Pt center{};
  double radius = 1;
};

// a solution of (H - E) u = 0 on K that does not come from the averaged
// family: the total field of a point source at y placed outside K
SampledField interior_target(const SampledField& V, const SampledField* A, const Ball& K,
                             const Pt& y, double E, SolveOptions opt = {});

struct TargetField {
  std::string name;
  SampledField u;
};

// how well nested spans of averaged solutions reproduce given solutions on K,
// in the cut-cell weighted L^2(K) norm
struct CompletenessReport {
  int dim = 0;
  double E = 0;
  Ball K;
  std::vector<std::string> targets;
  std::vector<int> degrees;
  Eigen::MatrixXd residual;            // (degree index, target index)
  std::vector<double> gram_cond;       // squared ratio of kept singular values
  std::vector<double> cutoff;          // singular value threshold applied
  std::vector<int> rank;               // singular values kept
  std::vector<int> dropped;            // family columns regularized away
  std::vector<Eigen::VectorXd> gram_eigs;  // Gram spectrum per degree
};

// quadrature used to build the averaged family up to degree Lmax; exposed so
// callers can construct in-span targets with the identical rule
DirectionGrid completeness_rule(int dim, int Lmax);

CompletenessReport completeness_residual(const SampledField& V, const SampledField* A,
                                         const Ball& K, double E,
                                         const std::vector<TargetField>& targets,
                                         const std::vector<int>& degrees, SolveOptions opt = {});

// three point-source targets just outside K plus one held-out averaged
// solution concentrated at the given degree
std::vector<TargetField> default_completeness_targets(const SampledField& V,
                                                      const SampledField* A, const Ball& K,
                                                      double E, int held_degree,
                                                      SolveOptions opt = {});

}  // namespace scatlab
