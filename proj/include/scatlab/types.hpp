#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace scatlab {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

inline constexpr const char* kVersion = "0.1.0";

// error taxonomy, mapped to process exit codes by the CLI
struct SchemaError : std::runtime_error {        // bad config / bad input file (exit 2)
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {        // iteration failed to converge (exit 3)
  using std::runtime_error::runtime_error;
};
struct PreconditionError : std::runtime_error {  // refused input (aliasing, resonance, ...) (exit 4)
  using std::runtime_error::runtime_error;
};

struct Pt {
  double c[3] = {0, 0, 0};
  Pt() = default;
  Pt(double x, double y) { c[0] = x; c[1] = y; }
  Pt(double x, double y, double z) { c[0] = x; c[1] = y; c[2] = z; }
  double& operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }
};

inline Pt operator+(const Pt& a, const Pt& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Pt operator-(const Pt& a, const Pt& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Pt operator*(double s, const Pt& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Pt& a, const Pt& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Pt& a) { return std::sqrt(dot(a, a)); }
inline Pt cross(const Pt& a, const Pt& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Uniform cell-centered grid on a box: sample i sits at lo + (i + 1/2) h.
// Cell-centered means boxes symmetric about 0 carry no sample at the origin.
struct Grid {
  int dim = 2;
  int n[3] = {1, 1, 1};
  double lo[3] = {0, 0, 0};
  double h = 0;

  static Grid cube(int dim, double half, int npts) {
    Grid g;
    g.dim = dim;
    g.h = 2 * half / npts;
    for (int d = 0; d < dim; ++d) {
      g.n[d] = npts;
      g.lo[d] = -half;
    }
    return g;
  }

  std::int64_t npts() const {
    return std::int64_t(n[0]) * n[1] * n[2];
  }
  double hi(int d) const { return lo[d] + n[d] * h; }
  double box_len(int d) const { return n[d] * h; }

  Pt point(int ix, int iy, int iz = 0) const {
    return {lo[0] + (ix + 0.5) * h, lo[1] + (iy + 0.5) * h,
            dim == 3 ? lo[2] + (iz + 0.5) * h : 0.0};
  }
  std::int64_t index(int ix, int iy, int iz = 0) const {
    return (std::int64_t(ix) * n[1] + iy) * n[2] + iz;
  }
  Pt point_of_index(std::int64_t idx) const {
    int iz = int(idx % n[2]);
    std::int64_t r = idx / n[2];
    int iy = int(r % n[1]);
    int ix = int(r / n[1]);
    return point(ix, iy, iz);
  }

  bool same_as(const Grid& o) const {
    if (dim != o.dim || h != o.h) return false;
    for (int d = 0; d < dim; ++d)
      if (n[d] != o.n[d] || lo[d] != o.lo[d]) return false;
    return true;
  }
};

enum class FieldRole : std::uint32_t {
  Generic = 0,
  Potential = 1,        // scalar V
  VectorPotential = 2,  // A, dim components
  MagneticField = 3,    // antisymmetric tensor, stored (F12, F13, F23)
  Wavefunction = 4,
  Gradient = 5,
};

// component-major storage: a[c * npts + idx]
struct SampledField {
  Grid g;
  int ncomp = 1;
  FieldRole role = FieldRole::Generic;
  std::vector<cplx> a;

  SampledField() = default;
  SampledField(const Grid& grid, int ncomponents, FieldRole r = FieldRole::Generic)
      : g(grid), ncomp(ncomponents), role(r), a(std::size_t(grid.npts()) * ncomponents, cplx(0)) {}

  cplx& at(int comp, std::int64_t idx) { return a[std::size_t(comp) * g.npts() + idx]; }
  cplx at(int comp, std::int64_t idx) const { return a[std::size_t(comp) * g.npts() + idx]; }
  cplx* comp(int c) { return a.data() + std::size_t(c) * g.npts(); }
  const cplx* comp(int c) const { return a.data() + std::size_t(c) * g.npts(); }
};

inline double max_abs(const SampledField& f) {
  double m = 0;
  for (const auto& v : f.a) m = std::max(m, std::abs(v));
  return m;
}

inline double l2_norm(const SampledField& f) {
  double s = 0;
  for (const auto& v : f.a) s += std::norm(v);
  return std::sqrt(s * std::pow(f.g.h, f.g.dim));
}

}  // namespace scatlab
