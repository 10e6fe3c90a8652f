#pragma once

#include "scatlab/types.hpp"

namespace scatlab {
namespace sf {

// cylinder functions, integer order (order may be negative)
double bessel_J(int m, double z);
double bessel_Y(int m, double z);  // z > 0
cplx hankel1(int m, double z);     // J + iY, z > 0
// derivatives w.r.t. z
double bessel_Jp(int m, double z);
double bessel_Yp(int m, double z);
cplx hankel1p(int m, double z);

// spherical Bessel, l >= 0
double sph_j(int l, double z);
double sph_y(int l, double z);  // z > 0
cplx sph_h1(int l, double z);
double sph_jp(int l, double z);
double sph_yp(int l, double z);
cplx sph_h1p(int l, double z);

double legendre_P(int l, double x);

// complex spherical harmonic Y_l^m(dir), Condon-Shortley phase, orthonormal
// on S^2; dir need not be normalized exactly (it is renormalized)
cplx sph_harmonic(int l, int m, const Pt& dir);

// n=2 analogue: e^{im theta}/sqrt(2 pi)
cplx circ_harmonic(int m, const Pt& dir);

}  // namespace sf

// radial wave dispatch used by the partial-wave and trace machinery
enum class RadialKind { Regular, Irregular, Outgoing };
cplx radial_wave(int dim, int l, RadialKind kind, double z);
cplx radial_wave_deriv(int dim, int l, RadialKind kind, double z);

// outgoing free Green kernel at distance r, energy E > 0
cplx helmholtz_green(int dim, double E, double r);

}  // namespace scatlab
