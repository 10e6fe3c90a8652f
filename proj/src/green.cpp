#include "scatlab/green.hpp"

#include <cmath>

#include "scatlab/special.hpp"

namespace scatlab {

int next_smooth(int n) {
  for (int c = std::max(1, n);; ++c) {
    int r = c;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return c;
  }
}

namespace {

// (e^{i w} - 1)/w stable for small |w|
cplx expim1_over(double w) {
  if (std::abs(w) < 1e-4) {
    cplx iw(0, w);
    return I * (1.0 + iw * (0.5 + iw * (1.0 / 6.0 + iw / 24.0)));
  }
  return (std::exp(cplx(0, w)) - 1.0) / cplx(w, 0);
}

}  // namespace

cplx truncated_green_symbol(int dim, double E, double D, double s) {
  double k = std::sqrt(E);
  if (dim == 3) {
    // int_{|x|<D} e^{ikr}/(4 pi r) e^{-i xi x} dx = (1/s) int_0^D e^{ikr} sin(sr) dr
    if (s * D < 1e-4) {
      // s -> 0 limit: -d/du (e^{iuD}-1)/u at u = k
      cplx eikD = std::exp(I * k * D);
      return (eikD - 1.0) / (k * k) - I * D * eikD / k;
    }
    cplx fp = D * expim1_over((k + s) * D);
    cplx fm = D * expim1_over((k - s) * D);
    return -(fp - fm) / (2 * s);
  }
  if (dim == 2) {
    // (i pi/2) int_0^D H0(kr) J0(sr) r dr, Lommel closed form
    double kD = k * D;
    cplx H0 = sf::hankel1(0, kD), H1 = sf::hankel1(1, kD);
    if (std::abs(s - k) * D < 1e-5) {
      // removable point: N'(k)/(s+k) with
      // N'(k) = (i pi D/2) kD [H0(kD) J0(kD) + H1(kD) J1(kD)]
      cplx Np = 0.5 * I * PI * D * (k * D) *
                (H0 * sf::bessel_J(0, kD) + H1 * sf::bessel_J(1, kD));
      return Np / (s + k);
    }
    double sD = s * D;
    cplx N = 1.0 + 0.5 * I * PI * D *
                       (s * H0 * sf::bessel_J(1, sD) - k * H1 * sf::bessel_J(0, sD));
    return N / ((s - k) * (s + k));
  }
  throw std::invalid_argument("truncated_green_symbol: dim must be 2 or 3");
}

HelmholtzConvolver::HelmholtzConvolver(const Grid& g, double E, double support_half,
                                       double eval_half)
    : g_(g), E_(E), supp_half_(support_half) {
  if (!(E > 0)) throw PreconditionError("convolver: E must be positive");
  k_ = std::sqrt(E);
  double box_half = 0.5 * g.box_len(0);
  for (int d = 0; d < g.dim; ++d)
    if (std::abs(g.box_len(d) - g.box_len(0)) > 1e-12 || std::abs(g.lo[d] + box_half) > 1e-12)
      throw PreconditionError("convolver: box must be a cube centered at the origin");
  if (!(support_half > 0) || support_half > box_half / 2 + 1e-12)
    throw PreconditionError(
        "convolver: source support must keep a margin of at least a quarter box "
        "from the boundary (aliasing risk)");
  eval_half_ = (eval_half > 0) ? std::min(eval_half, box_half) : box_half;

  // kernel cut at the farthest eval-source distance; pad so periodic images
  // of the cut kernel stay out of reach
  double reach = eval_half_ + supp_half_;
  D_ = reach * std::sqrt(double(g.dim));
  double P = D_ + reach;
  mtot_ = 1;
  for (int d = 0; d < 3; ++d) m_[d] = 1;
  for (int d = 0; d < g.dim; ++d) {
    m_[d] = next_smooth(std::max(g.n[d], int(std::ceil(P / g.h))));
    mtot_ *= m_[d];
  }
  fft_ = std::make_unique<Fft>(g.dim, m_);
  for (int d = 0; d < g.dim; ++d) {
    freq_[d].resize(m_[d]);
    for (int m = 0; m < m_[d]; ++m) freq_[d][m] = Fft::freq(m, m_[d], g.h);
  }
  symbol_.resize(mtot_);
  std::int64_t idx = 0;
  for (int ix = 0; ix < m_[0]; ++ix)
    for (int iy = 0; iy < m_[1]; ++iy)
      for (int iz = 0; iz < m_[2]; ++iz, ++idx) {
        double s2 = freq_[0][ix] * freq_[0][ix] + freq_[1][iy] * freq_[1][iy];
        if (g.dim == 3) s2 += freq_[2][iz] * freq_[2][iz];
        symbol_[idx] = truncated_green_symbol(g.dim, E_, D_, std::sqrt(s2));
      }
  work_.resize(mtot_);
  spec_.resize(mtot_);
}

void HelmholtzConvolver::check_support(const cplx* src) const {
  double mx = 0;
  for (std::int64_t i = 0; i < g_.npts(); ++i) mx = std::max(mx, std::abs(src[i]));
  if (mx == 0) return;
  double tol = 1e-12 * mx;
  for (std::int64_t i = 0; i < g_.npts(); ++i) {
    if (std::abs(src[i]) <= tol) continue;
    Pt x = g_.point_of_index(i);
    for (int d = 0; d < g_.dim; ++d)
      if (std::abs(x[d]) > supp_half_ + 1e-12)
        throw PreconditionError("convolver: source leaks outside its declared support");
  }
}

void HelmholtzConvolver::apply(const cplx* src, cplx* pot, std::array<cplx*, 3> grad) const {
  check_support(src);
  std::fill(work_.begin(), work_.end(), cplx(0));
  // embed the grid window at the origin corner of the padded box; only
  // coordinate differences matter for the convolution
  for (int ix = 0; ix < g_.n[0]; ++ix)
    for (int iy = 0; iy < g_.n[1]; ++iy) {
      const cplx* s = src + g_.index(ix, iy, 0);
      cplx* w = &work_[(std::int64_t(ix) * m_[1] + iy) * m_[2]];
      for (int iz = 0; iz < g_.n[2]; ++iz) w[iz] = s[iz];
    }
  fft_->forward(work_.data());
  for (std::int64_t i = 0; i < mtot_; ++i) work_[i] *= symbol_[i];
  if (pot) {
    std::copy(work_.begin(), work_.end(), spec_.begin());
    fft_->inverse(spec_.data());
    for (int ix = 0; ix < g_.n[0]; ++ix)
      for (int iy = 0; iy < g_.n[1]; ++iy) {
        cplx* p = pot + g_.index(ix, iy, 0);
        const cplx* w = &spec_[(std::int64_t(ix) * m_[1] + iy) * m_[2]];
        for (int iz = 0; iz < g_.n[2]; ++iz) p[iz] = w[iz];
      }
  }
  for (int d = 0; d < g_.dim; ++d) {
    if (!grad[d]) continue;
    std::copy(work_.begin(), work_.end(), spec_.begin());
    std::int64_t idx = 0;
    for (int ix = 0; ix < m_[0]; ++ix)
      for (int iy = 0; iy < m_[1]; ++iy)
        for (int iz = 0; iz < m_[2]; ++iz, ++idx) {
          int mm[3] = {ix, iy, iz};
          if (m_[d] % 2 == 0 && mm[d] == m_[d] / 2) {
            spec_[idx] = 0;
          } else {
            spec_[idx] *= I * freq_[d][mm[d]];
          }
        }
    fft_->inverse(spec_.data());
    for (int ix = 0; ix < g_.n[0]; ++ix)
      for (int iy = 0; iy < g_.n[1]; ++iy) {
        cplx* p = grad[d] + g_.index(ix, iy, 0);
        const cplx* w = &spec_[(std::int64_t(ix) * m_[1] + iy) * m_[2]];
        for (int iz = 0; iz < g_.n[2]; ++iz) p[iz] = w[iz];
      }
  }
}

SampledField volume_convolve(double E, const SampledField& f) {
  if (f.ncomp != 1) throw std::invalid_argument("volume_convolve wants a scalar field");
  const Grid& g = f.g;
  double mx = max_abs(f);
  double supp = 0;
  if (mx > 0) {
    double tol = 1e-13 * mx;
    for (std::int64_t i = 0; i < g.npts(); ++i) {
      if (std::abs(f.a[i]) <= tol) continue;
      Pt x = g.point_of_index(i);
      for (int d = 0; d < g.dim; ++d) supp = std::max(supp, std::abs(x[d]));
    }
  }
  double box_half = 0.5 * g.box_len(0);
  if (supp > box_half / 2 + 1e-12)
    throw PreconditionError("volume_convolve: field support violates the quarter-box margin");
  supp = std::max(supp, g.h);  // zero or near-point sources still need a box
  HelmholtzConvolver conv(g, E, supp);
  SampledField out(g, 1, f.role);
  conv.apply(f.comp(0), out.comp(0));
  return out;
}

}  // namespace scatlab
