#include "scatlab/operators.hpp"

#include "scatlab/fft.hpp"

namespace scatlab {

SampledField spectral_divergence(const SampledField& A) {
  const Grid& g = A.g;
  if (A.ncomp != g.dim) throw PreconditionError("divergence wants one component per axis");
  SampledField out(g, 1);
  std::vector<cplx> tmp(g.npts());
  for (int d = 0; d < g.dim; ++d) {
    spectral_derivative(g, A.comp(d), tmp.data(), d);
    for (std::int64_t i = 0; i < g.npts(); ++i) out.a[i] += tmp[i];
  }
  return out;
}

SampledField apply_Q(const SampledField& V, const SampledField* A, const SampledField& phi,
                     const SampledField& grad) {
  const Grid& g = phi.g;
  if (!V.g.same_as(g) || !grad.g.same_as(g) || (A && !A->g.same_as(g)))
    throw PreconditionError("apply_Q: fields must share one grid");
  if (V.ncomp != 1 || phi.ncomp != 1 || grad.ncomp != g.dim)
    throw PreconditionError("apply_Q: component shape mismatch");
  if (A && (g.dim != 3 || A->ncomp != 3))
    throw PreconditionError("apply_Q: vector potentials require dimension 3");

  SampledField out(g, 1, FieldRole::Wavefunction);
  for (std::int64_t i = 0; i < g.npts(); ++i) out.a[i] = V.a[i] * phi.a[i];
  if (!A) return out;

  SampledField div = spectral_divergence(*A);
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    cplx adotg = 0, a2 = 0;
    for (int d = 0; d < 3; ++d) {
      adotg += A->a[d * g.npts() + i] * grad.a[d * g.npts() + i];
      a2 += A->a[d * g.npts() + i] * A->a[d * g.npts() + i];
    }
    out.a[i] += 2.0 * I * adotg + I * div.a[i] * phi.a[i] + a2 * phi.a[i];
  }
  return out;
}

}  // namespace scatlab
