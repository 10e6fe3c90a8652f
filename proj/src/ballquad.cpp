#include "scatlab/ballquad.hpp"

#include <algorithm>
#include <cmath>

namespace scatlab {

namespace {

// P(sum a_i t_i <= beta) for independent t_i uniform on [0,1], a_i > 0:
// piecewise-polynomial CDF of the weighted Irwin-Hall distribution
double irwin_hall_cdf(int d, const double* a, double beta) {
  double total = 0;
  for (int i = 0; i < d; ++i) total += a[i];
  if (beta <= 0) return 0;
  if (beta >= total) return 1;
  double sum = 0;
  for (int mask = 0; mask < (1 << d); ++mask) {
    double arg = beta;
    int bits = 0;
    for (int i = 0; i < d; ++i)
      if (mask & (1 << i)) {
        arg -= a[i];
        ++bits;
      }
    if (arg <= 0) continue;
    double term = 1;
    for (int j = 0; j < d; ++j) term *= arg;
    sum += (bits & 1) ? -term : term;
  }
  double fact = 1;
  for (int i = 2; i <= d; ++i) fact *= i;
  for (int i = 0; i < d; ++i) fact *= a[i];
  return std::clamp(sum / fact, 0.0, 1.0);
}

struct BallCut {
  Pt center;  // ball center
  double R = 1;
  int dim = 3;

  // classification of the box [x-half, x+half]^dim: -1 outside, +1 inside, 0 cut
  int classify(const Pt& x, double half) const {
    double dmin2 = 0, dmax2 = 0;
    for (int d = 0; d < dim; ++d) {
      double off = std::abs(x[d] - center[d]);
      double lo = std::max(0.0, off - half);
      double hi = off + half;
      dmin2 += lo * lo;
      dmax2 += hi * hi;
    }
    if (dmax2 <= R * R) return 1;
    if (dmin2 >= R * R) return -1;
    return 0;
  }

  // tangent-plane volume fraction of a cut leaf box
  double leaf_fraction(const Pt& x, double half) const {
    Pt d = x - center;
    double r = norm(d);
    if (r < 1e-14) return 1.0;  // leaf at the ball center: inside
    double n[3] = {d[0] / r, d[1] / r, d[2] / r};
    if (dim == 2) n[2] = 0;
    // half-space n.y <= R - r relative to the leaf center
    return halfspace_box_fraction(dim, n, half, R - r);
  }

  double fraction(const Pt& x, double half, int depth) const {
    int c = classify(x, half);
    if (c > 0) return 1.0;
    if (c < 0) return 0.0;
    if (depth == 0) return leaf_fraction(x, half);
    double q = half / 2;
    double acc = 0;
    int nsub = dim == 2 ? 4 : 8;
    for (int s = 0; s < nsub; ++s) {
      Pt sub = x;
      sub[0] += (s & 1) ? q : -q;
      sub[1] += (s & 2) ? q : -q;
      if (dim == 3) sub[2] += (s & 4) ? q : -q;
      acc += fraction(sub, q, depth - 1);
    }
    return acc / nsub;
  }
};

}  // namespace

double halfspace_box_fraction(int dim, const double n[3], double half, double b) {
  // reflect to nonnegative normal components (the box is symmetric), then
  // drop near-parallel axes: the fraction does not depend on them
  double a[3];
  int d = 0;
  double shift = 0;
  for (int i = 0; i < dim; ++i) {
    double ai = std::abs(n[i]) * 2 * half;
    if (ai > 1e-9) a[d++] = ai;
  }
  for (int i = 0; i < d; ++i) shift += a[i] / 2;
  if (d == 0) return b >= 0 ? 1.0 : 0.0;
  return irwin_hall_cdf(d, a, b + shift);
}

std::vector<double> ball_weights(const Grid& g, const Pt& center, double R, int depth) {
  if (R <= 0) throw PreconditionError("ball_weights: radius must be positive");
  for (int d = 0; d < g.dim; ++d)
    if (center[d] - R < g.lo[d] || center[d] + R > g.hi(d))
      throw PreconditionError("ball_weights: ball extends past the grid box");

  BallCut cut{center, R, g.dim};
  double cell = std::pow(g.h, g.dim);
  double half = g.h / 2;
  std::vector<double> w(std::size_t(g.npts()), 0.0);
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    Pt x = g.point_of_index(i);
    int c = cut.classify(x, half);
    if (c > 0)
      w[std::size_t(i)] = cell;
    else if (c == 0)
      w[std::size_t(i)] = cell * cut.fraction(x, half, depth);
  }
  return w;
}

}  // namespace scatlab
