#pragma once

#include "scatlab/types.hpp"

namespace scatlab {

// Per-cell quadrature weights for integrals over the ball |x - center| <= R.
// Cells fully inside keep their volume h^dim, outside cells get zero, and
// cells straddling the boundary are subdivided `depth` times; the finest
// subcells are cut by the tangent plane of the sphere at the nearest radial
// point, whose box intersection volume has a closed form.  The resulting
// quadrature is second order in h for smooth integrands, with an O((h/2^depth)^2)
// boundary constant.
std::vector<double> ball_weights(const Grid& g, const Pt& center, double R, int depth = 4);

// volume fraction of the box [-half,half]^dim cut by the half-space
// {y : n.(y - x0) <= b} with |n| = 1 (b measured from the box center x0 = 0)
double halfspace_box_fraction(int dim, const double n[3], double half, double b);

}  // namespace scatlab
