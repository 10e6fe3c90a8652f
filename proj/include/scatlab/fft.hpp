#pragma once

#include "scatlab/types.hpp"

namespace scatlab {

// Thin wrapper over FFTW complex transforms.  Plans are created with
// FFTW_ESTIMATE: plan search (MEASURE) picks algorithms by timing, and the
// tiny numerical differences between algorithm choices would make repeated
// runs non-reproducible.
class Fft {
 public:
  Fft(int dim, const int n[3]);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  void forward(cplx* data) const;  // in place
  void inverse(cplx* data) const;  // in place, normalized by 1/N

  // frequency of DFT bin m on an axis with npts samples and spacing h
  static double freq(int m, int npts, double h) {
    int mm = (m <= npts / 2) ? m : m - npts;
    return 2.0 * PI * mm / (npts * h);
  }

 private:
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
  std::int64_t ntot_ = 0;
};

// spectral partial derivative d/dx_axis of a periodic sample
void spectral_derivative(const Grid& g, const cplx* in, cplx* out, int axis);

// spectral gradient of a scalar field (margin rule: data must be near zero at
// the box boundary for the periodic extension to make sense)
SampledField spectral_gradient(const SampledField& f);

}  // namespace scatlab
