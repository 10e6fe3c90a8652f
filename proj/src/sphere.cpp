#include "scatlab/sphere.hpp"

#include <gsl/gsl_integration.h>

#include "scatlab/special.hpp"

namespace scatlab {

double surface_area(int dim) {
  if (dim == 2) return 2 * PI;
  if (dim == 3) return 4 * PI;
  throw std::invalid_argument("surface_area: dim must be 2 or 3");
}

DirectionGrid sphere_rule(int dim, int degree) {
  if (degree < 0) throw std::invalid_argument("sphere_rule: degree must be >= 0");
  DirectionGrid g;
  g.dim = dim;
  g.degree = degree;
  if (dim == 2) {
    int nq = 2 * degree + 2;
    for (int q = 0; q < nq; ++q) {
      double th = 2 * PI * q / nq;
      g.nodes.push_back({std::cos(th), std::sin(th)});
      g.w.push_back(2 * PI / nq);
    }
    return g;
  }
  if (dim == 3) {
    int npol = degree + 1;
    int naz = 2 * degree + 2;
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(npol);
    for (int i = 0; i < npol; ++i) {
      double ct, wt;
      gsl_integration_glfixed_point(-1.0, 1.0, i, &ct, &wt, t);
      double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      for (int q = 0; q < naz; ++q) {
        double ph = 2 * PI * q / naz;
        g.nodes.push_back({st * std::cos(ph), st * std::sin(ph), ct});
        g.w.push_back(wt * 2 * PI / naz);
      }
    }
    gsl_integration_glfixed_table_free(t);
    return g;
  }
  throw std::invalid_argument("sphere_rule: dim must be 2 or 3");
}

int HarmonicBasis::l_of(int idx) const {
  if (dim == 2) return std::abs(idx - L);
  int l = int(std::sqrt(double(idx)));
  while (l * l > idx) --l;
  while ((l + 1) * (l + 1) <= idx) ++l;
  return l;
}

int HarmonicBasis::m_of(int idx) const {
  if (dim == 2) return idx - L;
  int l = l_of(idx);
  return idx - l * l - l;
}

int HarmonicBasis::index_of(int l, int m) const {
  if (dim == 2) return m + L;  // l unused
  return l * l + l + m;
}

cplx HarmonicBasis::eval(int idx, const Pt& dir) const {
  if (dim == 2) return sf::circ_harmonic(m_of(idx), dir);
  return sf::sph_harmonic(l_of(idx), m_of(idx), dir);
}

cplx HarmonicBasis::il_phase(int idx) const {
  int l = l_of(idx);
  switch (l & 3) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

Eigen::MatrixXcd harmonic_matrix(const HarmonicBasis& basis, const DirectionGrid& dirs) {
  Eigen::MatrixXcd Y(dirs.size(), basis.size());
  for (int q = 0; q < dirs.size(); ++q)
    for (int b = 0; b < basis.size(); ++b) Y(q, b) = basis.eval(b, dirs.nodes[q]);
  return Y;
}

}  // namespace scatlab
