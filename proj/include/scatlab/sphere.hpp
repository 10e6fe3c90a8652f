#pragma once

#include <Eigen/Dense>

#include "scatlab/types.hpp"

namespace scatlab {

// Quadrature nodes/weights on S^{dim-1} integrating products of harmonics of
// total degree <= 2*degree exactly.
//   dim=2: 2L+2 equispaced angles, uniform weights
//   dim=3: Gauss-Legendre in cos(theta) (L+1 nodes) x uniform azimuth (2L+2)
struct DirectionGrid {
  int dim = 2;
  int degree = 0;
  std::vector<Pt> nodes;
  std::vector<double> w;
  int size() const { return int(nodes.size()); }
};

DirectionGrid sphere_rule(int dim, int degree);

// Orthonormal harmonic basis on S^{dim-1} up to degree L.
//   dim=2: e^{im theta}/sqrt(2 pi), m = -L..L        (size 2L+1)
//   dim=3: Y_l^m, l = 0..L, m = -l..l                (size (L+1)^2)
struct HarmonicBasis {
  int dim = 2;
  int L = 0;

  int size() const { return dim == 2 ? 2 * L + 1 : (L + 1) * (L + 1); }
  int l_of(int idx) const;
  int m_of(int idx) const;
  int index_of(int l, int m) const;
  cplx eval(int idx, const Pt& dir) const;

  // i^l phase used by plane-wave expansions (i^m in 2D with |m|)
  cplx il_phase(int idx) const;
};

// rows = quadrature nodes, cols = basis functions
Eigen::MatrixXcd harmonic_matrix(const HarmonicBasis& basis, const DirectionGrid& dirs);

double surface_area(int dim);  // |S^{dim-1}|

}  // namespace scatlab
