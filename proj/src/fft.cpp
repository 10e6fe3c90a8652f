#include "scatlab/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace scatlab {

// fftw_execute_dft on distinct arrays is thread-safe, but plan creation and
// destruction are not; all planner calls go through this lock
static std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

Fft::Fft(int dim, const int n[3]) {
  int rank = dim;
  int dims[3] = {n[0], n[1], n[2]};
  ntot_ = 1;
  for (int d = 0; d < dim; ++d) ntot_ *= n[d];
  // plan on a scratch buffer; executed later on caller arrays via execute_dft
  std::vector<cplx> scratch(ntot_);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard<std::mutex> lock(planner_mutex());
  fwd_ = fftw_plan_dft(rank, dims, p, p, FFTW_FORWARD, flags);
  bwd_ = fftw_plan_dft(rank, dims, p, p, FFTW_BACKWARD, flags);
  if (!fwd_ || !bwd_) throw SolverError("fftw plan creation failed");
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fft::forward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void Fft::inverse(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
  double s = 1.0 / double(ntot_);
  for (std::int64_t i = 0; i < ntot_; ++i) data[i] *= s;
}

void spectral_derivative(const Grid& g, const cplx* in, cplx* out, int axis) {
  Fft fft(g.dim, g.n);
  std::vector<cplx> buf(in, in + g.npts());
  fft.forward(buf.data());
  std::int64_t idx = 0;
  for (int ix = 0; ix < g.n[0]; ++ix)
    for (int iy = 0; iy < g.n[1]; ++iy)
      for (int iz = 0; iz < g.n[2]; ++iz, ++idx) {
        int m[3] = {ix, iy, iz};
        double xi = Fft::freq(m[axis], g.n[axis], g.h);
        // Nyquist bin of an even transform gets zeroed: its derivative
        // multiplier has no consistent sign
        if (g.n[axis] % 2 == 0 && m[axis] == g.n[axis] / 2) {
          buf[idx] = 0;
        } else {
          buf[idx] *= I * xi;
        }
      }
  fft.inverse(buf.data());
  std::copy(buf.begin(), buf.end(), out);
}

SampledField spectral_gradient(const SampledField& f) {
  if (f.ncomp != 1) throw std::invalid_argument("spectral_gradient wants a scalar field");
  SampledField grad(f.g, f.g.dim, FieldRole::Gradient);
  for (int d = 0; d < f.g.dim; ++d) spectral_derivative(f.g, f.comp(0), grad.comp(d), d);
  return grad;
}

}  // namespace scatlab
