#pragma once

#include "scatlab/types.hpp"

namespace scatlab {

// divergence of a vector sample by spectral differentiation
SampledField spectral_divergence(const SampledField& A);

// (2i A.grad + i DivA + A^2 + V) phi.  A may be null for the electric-only
// case; grad must come from the same sample of phi.
SampledField apply_Q(const SampledField& V, const SampledField* A, const SampledField& phi,
                     const SampledField& grad);

}  // namespace scatlab
