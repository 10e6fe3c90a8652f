#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include "scatlab/fft.hpp"
#include "scatlab/forward.hpp"
#include "scatlab/gmres.hpp"
#include "scatlab/inverse.hpp"

namespace scatlab {

using Eigen::VectorXcd;

std::pair<CgoParameter, CgoParameter> cgo_parameters(const Pt& xi, double E, double tau) {
  if (E <= 0) throw PreconditionError("cgo_parameters needs E > 0");
  double x = norm(xi);
  if (tau <= 0.5 * x) throw PreconditionError("cgo_parameters needs tau > |xi| / 2");
  Pt e1 = x > 0 ? (1 / x) * xi : Pt{1, 0, 0};
  // seed with the axis least aligned with e1, then complete the frame
  Pt seed{1, 0, 0};
  if (std::abs(e1[1]) < std::abs(e1[0])) seed = {0, 1, 0};
  if (std::abs(e1[2]) < std::abs(e1[0]) && std::abs(e1[2]) < std::abs(e1[1])) seed = {0, 0, 1};
  Pt e2 = seed - dot(seed, e1) * e1;
  e2 = (1 / norm(e2)) * e2;
  Pt e3 = cross(e1, e2);
  double a = std::sqrt(E + tau * tau - 0.25 * x * x);
  CgoParameter p1, p2;
  p1.E = p2.E = E;
  p1.tau = p2.tau = tau;
  p1.xi = p2.xi = xi;
  for (int d = 0; d < 3; ++d) {
    p1.p[std::size_t(d)] = cplx(0.5 * xi[d] + a * e2[d], tau * e3[d]);
    p2.p[std::size_t(d)] = cplx(-0.5 * xi[d] + a * e2[d], -tau * e3[d]);
  }
  return {p1, p2};
}

SampledField restrict_to_ball(const SampledField& f, double R, const Pt& center) {
  SampledField out = f;
  std::int64_t np = f.g.npts();
  for (std::int64_t i = 0; i < np; ++i)
    if (norm(f.g.point_of_index(i) - center) >= R)
      for (int c = 0; c < f.ncomp; ++c) out.at(c, i) = 0;
  return out;
}

CgoRemainder cgo_solve(const SampledField& V, const CgoParameter& par, const CgoOptions& opt) {
  const Grid& g = V.g;
  if (g.dim != 3) throw PreconditionError("cgo_solve works on three-dimensional grids");
  if (V.ncomp != 1) throw PreconditionError("cgo_solve expects a scalar potential");
  if (par.E <= 0 || par.tau <= 0) throw PreconditionError("cgo_solve needs E > 0 and tau > 0");

  std::int64_t np = g.npts();
  CgoRemainder out;
  out.epsilon = opt.eps_scale * std::pow(par.E, 1.5) / par.tau;
  out.psi = SampledField(g, 1, FieldRole::Wavefunction);
  if (max_abs(V) == 0) return out;

  // inverse symbol of Lap + 2 i p . grad on the periodic box, shifted off its
  // zero set by -i eps; bins where the symbol vanishes outright take the
  // principal value zero of the locally odd symbol instead
  double pscale = 0;
  for (const auto& c : par.p) pscale += std::norm(c);
  double pv = 1e-12 * (1 + pscale);
  std::vector<cplx> ginv(static_cast<std::size_t>(np));
  std::vector<char> regbin(static_cast<std::size_t>(np), 0);
  std::int64_t idx = 0;
  for (int ix = 0; ix < g.n[0]; ++ix)
    for (int iy = 0; iy < g.n[1]; ++iy)
      for (int iz = 0; iz < g.n[2]; ++iz, ++idx) {
        double z0 = Fft::freq(ix, g.n[0], g.h);
        double z1 = Fft::freq(iy, g.n[1], g.h);
        double z2 = Fft::freq(iz, g.n[2], g.h);
        cplx pz = par.p[0] * z0 + par.p[1] * z1 + par.p[2] * z2;
        cplx m = -(z0 * z0 + z1 * z1 + z2 * z2) - 2.0 * pz;
        double am = std::abs(m);
        regbin[std::size_t(idx)] = am < 10 * out.epsilon ? 1 : 0;
        ginv[std::size_t(idx)] = am <= pv ? cplx(0) : 1.0 / (m - I * out.epsilon);
      }

  Fft fft(g.dim, g.n);
  auto green = [&](VectorXcd u) {
    fft.forward(u.data());
    for (std::int64_t i = 0; i < np; ++i) u[i] *= ginv[std::size_t(i)];
    fft.inverse(u.data());
    return u;
  };
  auto contraction = [&](const VectorXcd& u) {
    VectorXcd t(np);
    for (std::int64_t i = 0; i < np; ++i) t[i] = V.at(0, i) * u[i];
    return green(std::move(t));
  };

  // divergence guard for the fixed-point form psi = G V + G V psi
  std::mt19937 rng(20240817u);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  VectorXcd z(np);
  for (std::int64_t i = 0; i < np; ++i) z[i] = cplx(uni(rng), uni(rng));
  z /= z.norm();
  double rho = 0;
  for (int it = 0; it < 8; ++it) {
    VectorXcd zn = contraction(z);
    rho = zn.norm();
    if (rho == 0) break;
    z = zn / rho;
  }
  out.spectral_radius = rho;
  if (rho >= 1.0)
    throw SolverError("conjugated-equation iteration diverges (spectral radius estimate " +
                      std::to_string(rho) + "); weaken the contrast or raise tau");

  VectorXcd b(np);
  for (std::int64_t i = 0; i < np; ++i) b[i] = V.at(0, i);
  b = green(std::move(b));
  VectorXcd psi = VectorXcd::Zero(np);
  auto apply = [&](const VectorXcd& u) { return VectorXcd(u - contraction(u)); };
  GmresReport rep = gmres(apply, b, psi, GmresOptions{60, opt.maxiter, opt.tol});
  if (!rep.converged)
    throw SolverError("conjugated-equation solve stalled at relative residual " +
                      std::to_string(rep.residual));
  out.iterations = rep.iterations;

  for (std::int64_t i = 0; i < np; ++i) out.psi.at(0, i) = psi[i];
  double wsum = 0;
  for (std::int64_t i = 0; i < np; ++i) {
    Pt x = g.point_of_index(i);
    wsum += std::norm(psi[i]) / (1 + dot(x, x));
  }
  out.weighted_norm = std::sqrt(wsum * std::pow(g.h, g.dim));

  // energy share of the remainder within 10 eps of the zero set
  VectorXcd ph = psi;
  fft.forward(ph.data());
  double tot = 0, reg = 0;
  for (std::int64_t i = 0; i < np; ++i) {
    double e = std::norm(ph[i]);
    tot += e;
    if (regbin[std::size_t(i)]) reg += e;
  }
  out.reg_fraction = tot > 0 ? reg / tot : 0;
  out.reg_warning = out.reg_fraction > 0.2;
  return out;
}

FourierDifference fourier_difference(const ScenarioPair& pair, double E,
                                     const FourierOptions& opt) {
  const Grid& g = pair.V1.g;
  if (g.dim != 3) throw PreconditionError("fourier_difference needs a three-dimensional pair");
  if (pair.A1 || pair.A2) throw PreconditionError("fourier_difference handles electric pairs only");
  if (!pair.V2.g.same_as(g)) throw PreconditionError("pair potentials must share one grid");
  double scale = std::max({max_abs(pair.V1), max_abs(pair.V2), 1e-30});
  if (pair_annulus_defect(pair) > 1e-10 * scale)
    throw PreconditionError("pair potentials must agree outside the ball of radius R");

  std::vector<double> taus = opt.tau;
  if (taus.empty())
    for (double f : {4.0, 8.0, 16.0, 32.0}) taus.push_back(f * std::sqrt(E));
  if (taus.size() < 2) throw PreconditionError("the tau schedule needs at least two points");

  SampledField v1 = restrict_to_ball(pair.V1, pair.R);
  SampledField v2 = restrict_to_ball(pair.V2, pair.R);

  // cells carrying the difference, enough for every pairing below
  std::int64_t np = g.npts();
  std::vector<std::int64_t> cells;
  std::vector<cplx> dv;
  for (std::int64_t i = 0; i < np; ++i) {
    cplx d = v2.at(0, i) - v1.at(0, i);
    if (d != cplx(0)) {
      cells.push_back(i);
      dv.push_back(d);
    }
  }

  int nside = int(std::lround(opt.xi_max / opt.dxi));
  std::vector<Pt> xis;
  for (int ix = -nside; ix <= nside; ++ix)
    for (int iy = -nside; iy <= nside; ++iy)
      for (int iz = -nside; iz <= nside; ++iz)
        xis.push_back({opt.dxi * ix, opt.dxi * iy, opt.dxi * iz});

  FourierDifference out;
  out.coeff.resize(xis.size());
  out.epsilon = opt.cgo.eps_scale * std::pow(E, 1.5) / taus.back();

  double hn = std::pow(g.h, g.dim);
  std::vector<std::exception_ptr> errs(xis.size());
  parallel_for(int(xis.size()), [&](int j) {
    try {
      const Pt& xi = xis[std::size_t(j)];
      auto coeff_at = [&](double tau) {
        auto [p1, p2] = cgo_parameters(xi, E, tau);
        CgoRemainder r1 = cgo_solve(v1, p1, opt.cgo);
        CgoRemainder r2 = cgo_solve(v2, p2, opt.cgo);
        cplx acc = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
          std::int64_t i = cells[c];
          Pt x = g.point_of_index(i);
          cplx mod = std::exp(I * dot(xi, x));
          acc += dv[c] * mod * (1.0 + r1.psi.at(0, i)) * std::conj(1.0 + r2.psi.at(0, i));
        }
        return hn * acc;
      };
      FourierCoefficient& fc = out.coeff[std::size_t(j)];
      fc.xi = xi;
      cplx prev = coeff_at(taus[0]);
      for (std::size_t t = 1; t < taus.size(); ++t) {
        cplx cur = coeff_at(taus[t]);
        fc.value = cur;
        fc.tau = taus[t];
        fc.last_change = std::abs(cur - prev) / std::max(std::abs(cur), opt.stab_floor);
        if (fc.last_change < opt.stab_rel) {
          fc.stabilized = true;
          break;
        }
        prev = cur;
      }
    } catch (...) {
      errs[std::size_t(j)] = std::current_exception();
    }
  });
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  for (const auto& fc : out.coeff)
    if (!fc.stabilized) ++out.flagged;

  // inverse transform of the coefficient grid
  out.difference = SampledField(g, 1, FieldRole::Potential);
  double mea = std::pow(opt.dxi / (2 * PI), 3);
  parallel_for(8, [&](int t) {
    for (std::int64_t i = t; i < np; i += 8) {
      Pt x = g.point_of_index(i);
      cplx acc = 0;
      for (const auto& fc : out.coeff) acc += fc.value * std::exp(-I * dot(fc.xi, x));
      out.difference.at(0, i) = mea * acc;
    }
  });

  double dmax = 0;
  for (std::int64_t i = 0; i < np; ++i) {
    Pt x = g.point_of_index(i);
    if (norm(x) > pair.R) continue;
    cplx truth = v2.at(0, i) - v1.at(0, i);
    out.max_error = std::max(out.max_error, std::abs(out.difference.at(0, i) - truth));
    dmax = std::max(dmax, std::abs(truth));
  }
  out.rel_error = out.max_error / std::max(dmax, 1e-300);
  return out;
}

}  // namespace scatlab
