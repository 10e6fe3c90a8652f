#pragma once

#include <array>
#include <memory>

#include "scatlab/fft.hpp"
#include "scatlab/types.hpp"

namespace scatlab {

// Convolution with the outgoing free Green kernel G_E by the truncated-kernel
// spectral method: the kernel is cut off at radius D chosen so that every
// (evaluation point, source point) pair at play lies within D, the grid is
// zero-padded far enough that periodic images of the truncated kernel cannot
// reach back into the window, and the Fourier symbol of the truncated kernel
// is known in closed form.  Exact continuum kernel in the window, spectral
// accuracy on smooth data.
class HelmholtzConvolver {
 public:
  // support_half: per-axis half extent of the source support (centered box).
  // eval_half <= 0 evaluates on the whole grid box; otherwise results are
  // only valid on |x_d| <= eval_half (used to shrink padding inside solver
  // iterations).
  HelmholtzConvolver(const Grid& g, double E, double support_half, double eval_half = -1);

  // pot <- G_E * src, grad (optional) <- gradient of the same.
  // src/pot/grad are full-grid scalar arrays (g.npts() entries).
  void apply(const cplx* src, cplx* pot, std::array<cplx*, 3> grad = {nullptr, nullptr, nullptr}) const;

  double truncation_radius() const { return D_; }
  const int* padded_shape() const { return m_; }
  double eval_half() const { return eval_half_; }

 private:
  void check_support(const cplx* src) const;

  Grid g_;
  double E_ = 0, k_ = 0, D_ = 0;
  double supp_half_ = 0, eval_half_ = 0;
  int m_[3] = {1, 1, 1};
  std::int64_t mtot_ = 1;
  std::vector<cplx> symbol_;
  std::array<std::vector<double>, 3> freq_;
  std::unique_ptr<Fft> fft_;
  mutable std::vector<cplx> work_, spec_;
};

// closed-form Fourier transform of the radius-D truncated kernel at |xi| = s
cplx truncated_green_symbol(int dim, double E, double D, double s);

// public one-shot op: measures the support of f, enforces the margin rule
// (support must keep >= box/4 away from the boundary), convolves.
SampledField volume_convolve(double E, const SampledField& f);

int next_smooth(int n);  // smallest 7-smooth integer >= n

}  // namespace scatlab
