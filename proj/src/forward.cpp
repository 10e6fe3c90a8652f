#include "scatlab/forward.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "scatlab/gmres.hpp"
#include "scatlab/magnetic.hpp"
#include "scatlab/operators.hpp"
#include "scatlab/special.hpp"

namespace scatlab {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

void parallel_for(int n, const std::function<void(int)>& fn) {
  int nthr = int(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SCATLAB_THREADS")) nthr = std::atoi(env);
  nthr = std::clamp(nthr, 1, std::min(n, 8));
  if (nthr <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < nthr; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += nthr) fn(i);
    });
  for (auto& th : pool) th.join();
}

IncidentField plane_wave(int dim, double E, const Pt& omega) {
  if (E <= 0) throw PreconditionError("plane_wave: energy must be positive");
  double k = std::sqrt(E);
  Pt w = (1.0 / norm(omega)) * omega;
  return {[k, w](const Pt& x) { return std::exp(I * (k * dot(x, w))); },
          [k, w, dim](const Pt& x, cplx* out) {
            cplx v = I * k * std::exp(I * (k * dot(x, w)));
            for (int d = 0; d < dim; ++d) out[d] = v * w[d];
          }};
}

IncidentField green_pole(int dim, double E, const Pt& y) {
  if (E <= 0) throw PreconditionError("green_pole: energy must be positive");
  double k = std::sqrt(E);
  return {[dim, E, y](const Pt& x) { return helmholtz_green(dim, E, norm(x - y)); },
          [dim, k, y](const Pt& x, cplx* out) {
            Pt d = x - y;
            double r = norm(d);
            cplx dg;
            if (dim == 3) {
              dg = std::exp(I * (k * r)) * (I * k * r - 1.0) / (4 * PI * r * r);
            } else {
              dg = -(I * k / 4.0) * sf::hankel1(1, k * r);
            }
            for (int c = 0; c < dim; ++c) out[c] = dg * d[c] / r;
          }};
}

LippmannSchwinger::LippmannSchwinger(const SampledField& V, const SampledField* A, double E,
                                     SolveOptions opt)
    : g_(V.g), E_(E), k_(std::sqrt(E)), opt_(opt) {
  if (E <= 0) throw PreconditionError("scattering solve: energy must be positive");
  if (V.ncomp != 1) throw PreconditionError("scattering solve: V must be scalar");
  if (A) {
    if (!A->g.same_as(g_)) throw PreconditionError("scattering solve: V and A grids differ");
    if (A->ncomp != g_.dim) throw PreconditionError("scattering solve: A needs dim components");
    has_a_ = true;
  }
  double box_half = g_.box_len(0) / 2;
  for (int d = 0; d < g_.dim; ++d) {
    if (std::abs(g_.lo[d] + g_.hi(d)) > 1e-9 * g_.box_len(d))
      throw PreconditionError("scattering solve: grid box must be centered at the origin");
    box_half = std::min(box_half, g_.box_len(d) / 2);
  }

  // locate the perturbation support; Q phi lives only on these cells
  double vmax = max_abs(V);
  if (A) vmax = std::max(vmax, max_abs(*A));
  double thresh = 1e-13 * vmax;
  double ext = 0;
  for (std::int64_t i = 0; i < g_.npts(); ++i) {
    double m = std::abs(V.at(0, i));
    if (A)
      for (int c = 0; c < g_.dim; ++c) m = std::max(m, std::abs(A->at(c, i)));
    if (m > thresh) {
      supp_.push_back(i);
      Pt x = g_.point_of_index(i);
      for (int d = 0; d < g_.dim; ++d) ext = std::max(ext, std::abs(x[d]));
    }
  }
  supp_half_ = std::max(ext + g_.h / 2, g_.h);
  if (supp_half_ > box_half / 2 + 1e-12)
    throw PreconditionError(
        "scattering solve: potential support exceeds half the box; enlarge the grid");

  if (!supp_.empty()) {
    SampledField diva;
    if (has_a_) diva = spectral_divergence(*A);
    coef_v_.resize(supp_.size());
    for (int d = 0; d < g_.dim; ++d) coef_a_[d].resize(supp_.size());
    for (std::size_t s = 0; s < supp_.size(); ++s) {
      std::int64_t i = supp_[s];
      cplx cv = V.at(0, i);
      if (has_a_) {
        cplx a2 = 0;
        for (int c = 0; c < g_.dim; ++c) {
          cplx ac = A->at(c, i);
          a2 += ac * ac;
          coef_a_[c][s] = 2.0 * I * ac;
        }
        cv += I * diva.at(0, i) + a2;
      } else {
        for (int c = 0; c < g_.dim; ++c) coef_a_[c][s] = 0;
      }
      coef_v_[s] = cv;
    }
    conv_supp_ = std::make_unique<HelmholtzConvolver>(g_, E_, supp_half_, supp_half_);
    conv_full_ = std::make_unique<HelmholtzConvolver>(g_, E_, supp_half_, -1.0);
    scratch_.resize(std::size_t(g_.npts()) * std::size_t(1 + g_.dim));
  }
}

VectorXcd LippmannSchwinger::apply_op(const VectorXcd& q) const {
  const std::int64_t n = g_.npts();
  cplx* src = scratch_.data();
  cplx* pot = src;  // in-place: convolver copies the window first
  std::array<cplx*, 3> gr = {nullptr, nullptr, nullptr};
  for (int d = 0; d < g_.dim; ++d) gr[d] = scratch_.data() + std::size_t(n) * (1 + d);

  std::fill(scratch_.begin(), scratch_.begin() + n, cplx(0));
  for (std::size_t s = 0; s < supp_.size(); ++s) src[supp_[s]] = q[Eigen::Index(s)];
  conv_supp_->apply(src, pot, gr);

  VectorXcd out(q.size());
  for (std::size_t s = 0; s < supp_.size(); ++s) {
    std::int64_t i = supp_[s];
    cplx acc = q[Eigen::Index(s)] + coef_v_[s] * pot[i];
    for (int d = 0; d < g_.dim; ++d) acc += coef_a_[d][s] * gr[d][i];
    out[Eigen::Index(s)] = acc;
  }
  return out;
}

VectorXcd LippmannSchwinger::rhs_of(const IncidentField& inc) const {
  VectorXcd rhs(Eigen::Index(supp_.size()));
  cplx gradbuf[3];
  for (std::size_t s = 0; s < supp_.size(); ++s) {
    Pt x = g_.point_of_index(supp_[s]);
    cplx acc = coef_v_[s] * inc.value(x);
    inc.gradient(x, gradbuf);
    for (int d = 0; d < g_.dim; ++d) acc += coef_a_[d][s] * gradbuf[d];
    rhs[Eigen::Index(s)] = acc;
  }
  return rhs;
}

ScatteringSolution LippmannSchwinger::solve(const IncidentField& inc, const Pt& omega_tag) const {
  ScatteringSolution sol;
  sol.omega = omega_tag;
  sol.E = E_;
  sol.phi = SampledField(g_, 1, FieldRole::Wavefunction);
  sol.grad = SampledField(g_, g_.dim, FieldRole::Gradient);

  cplx gradbuf[3];
  if (supp_.empty()) {
    for (std::int64_t i = 0; i < g_.npts(); ++i) {
      Pt x = g_.point_of_index(i);
      sol.phi.at(0, i) = inc.value(x);
      inc.gradient(x, gradbuf);
      for (int d = 0; d < g_.dim; ++d) sol.grad.at(d, i) = gradbuf[d];
    }
    return sol;
  }

  VectorXcd rhs = rhs_of(inc);
  VectorXcd q = VectorXcd::Zero(rhs.size());

  if (opt_.dense_direct) {
    if (supp_.size() > 2500)
      throw PreconditionError("dense solve limited to 2500 support cells; use the iterative path");
    MatrixXcd M(rhs.size(), rhs.size());
    for (Eigen::Index j = 0; j < rhs.size(); ++j)
      M.col(j) = apply_op(VectorXcd::Unit(rhs.size(), j));
    Eigen::PartialPivLU<MatrixXcd> lu(M);
    q = lu.solve(rhs);
    sol.cond_monitor = 1.0 / std::max(lu.rcond(), 1e-300);
    sol.iterations = 0;
    sol.residual = rhs.norm() > 0 ? (M * q - rhs).norm() / rhs.norm() : 0.0;
  } else {
    GmresOptions gopt{opt_.restart, opt_.maxiter, opt_.tol};
    GmresReport rep = gmres([this](const VectorXcd& v) { return apply_op(v); }, rhs, q, gopt);
    sol.cond_monitor = rep.cond;
    sol.iterations = rep.iterations;
    sol.residual = rep.residual;
    if (!rep.converged) {
      std::ostringstream os;
      os << "scattering solve did not converge: residual " << rep.residual << " after "
         << rep.iterations << " iterations; history tail";
      int nh = int(rep.history.size());
      for (int i = std::max(0, nh - 5); i < nh; ++i) os << " " << rep.history[i];
      throw SolverError(os.str());
    }
  }
  if (sol.cond_monitor > opt_.cond_cap) {
    std::ostringstream os;
    os << "near-resonant interior: condition monitor " << sol.cond_monitor
       << " exceeds the cap; shift the energy E away from the resonance";
    throw SolverError(os.str());
  }

  // one full-box pass materializes phi = phi_inc - G q and its gradient
  const std::int64_t n = g_.npts();
  cplx* src = scratch_.data();
  std::array<cplx*, 3> gr = {nullptr, nullptr, nullptr};
  for (int d = 0; d < g_.dim; ++d) gr[d] = scratch_.data() + std::size_t(n) * (1 + d);
  std::fill(scratch_.begin(), scratch_.begin() + n, cplx(0));
  for (std::size_t s = 0; s < supp_.size(); ++s) src[supp_[s]] = q[Eigen::Index(s)];
  conv_full_->apply(src, src, gr);
  for (std::int64_t i = 0; i < n; ++i) {
    Pt x = g_.point_of_index(i);
    sol.phi.at(0, i) = inc.value(x) - src[i];
    inc.gradient(x, gradbuf);
    for (int d = 0; d < g_.dim; ++d) sol.grad.at(d, i) = gradbuf[d] - gr[d][i];
  }
  return sol;
}

VectorXcd LippmannSchwinger::q_of(const ScatteringSolution& sol) const {
  VectorXcd q(Eigen::Index(supp_.size()));
  for (std::size_t s = 0; s < supp_.size(); ++s) {
    std::int64_t i = supp_[s];
    cplx acc = coef_v_[s] * sol.phi.at(0, i);
    for (int d = 0; d < g_.dim; ++d) acc += coef_a_[d][s] * sol.grad.at(d, i);
    q[Eigen::Index(s)] = acc;
  }
  return q;
}

double LippmannSchwinger::equation_residual(const ScatteringSolution& sol,
                                            const IncidentField& inc) const {
  if (supp_.empty()) return 0;
  VectorXcd rhs = rhs_of(inc);
  VectorXcd q = q_of(sol);
  double bn = rhs.norm();
  return bn > 0 ? (apply_op(q) - rhs).norm() / bn : 0.0;
}

namespace {

cplx farfield_constant(int dim, double E) {
  double k = std::sqrt(E);
  if (dim == 3) return cplx(-1.0 / (4 * PI), 0);
  return -std::exp(I * (PI / 4)) / std::sqrt(8 * PI * k);
}

}  // namespace

cplx LippmannSchwinger::far_coeff(const ScatteringSolution& sol, const Pt& nu) const {
  if (supp_.empty()) return 0;
  VectorXcd q = q_of(sol);
  cplx acc = 0;
  for (std::size_t s = 0; s < supp_.size(); ++s) {
    Pt y = g_.point_of_index(supp_[s]);
    acc += std::exp(-I * (k_ * dot(nu, y))) * q[Eigen::Index(s)];
  }
  return farfield_constant(g_.dim, E_) * std::pow(g_.h, g_.dim) * acc;
}

FarField far_field(const SampledField& V, const SampledField* A, double E,
                   const DirectionGrid& dirs, SolveOptions opt) {
  const int nq = dirs.size();
  FarField ff;
  ff.dim = V.g.dim;
  ff.E = E;
  ff.dirs = dirs;
  ff.f = MatrixXcd::Zero(nq, nq);
  if (dirs.dim != V.g.dim) throw PreconditionError("far_field: direction grid dimension mismatch");

  // probe instance validates the inputs and fixes the support once
  LippmannSchwinger probe(V, A, E, opt);
  if (probe.support_cells().empty()) return ff;

  const auto& supp = probe.support_cells();
  const double k = std::sqrt(E);
  const double cell = std::pow(V.g.h, V.g.dim);
  const cplx cff = farfield_constant(V.g.dim, E);
  MatrixXcd phase(nq, Eigen::Index(supp.size()));
  for (int i = 0; i < nq; ++i)
    for (std::size_t s = 0; s < supp.size(); ++s)
      phase(i, Eigen::Index(s)) = std::exp(-I * (k * dot(dirs.nodes[i], V.g.point_of_index(supp[s]))));

  MatrixXcd qmat(Eigen::Index(supp.size()), nq);
  int nthr = int(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SCATLAB_THREADS")) nthr = std::atoi(env);
  nthr = std::clamp(nthr, 1, std::min(nq, 8));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(static_cast<std::size_t>(nthr));
  for (int t = 0; t < nthr; ++t)
    pool.emplace_back([&, t] {
      try {
        // per-thread solver: the convolver work buffers are not shareable
        LippmannSchwinger ls(V, A, E, opt);
        for (int j = t; j < nq; j += nthr) {
          auto sol = ls.solve(plane_wave(V.g.dim, E, dirs.nodes[j]), dirs.nodes[j]);
          qmat.col(j) = ls.q_of(sol);
        }
      } catch (...) {
        errs[std::size_t(t)] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  ff.f = (cff * cell) * (phase * qmat);
  return ff;
}

double FarField::reciprocity_defect() const {
  const int nq = dirs.size();
  std::vector<int> neg(std::size_t(nq), -1);
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < nq; ++j)
      if (norm(dirs.nodes[i] + dirs.nodes[j]) < 1e-10) {
        neg[std::size_t(i)] = j;
        break;
      }
  double worst = 0;
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < nq; ++j) {
      if (neg[std::size_t(i)] < 0 || neg[std::size_t(j)] < 0)
        throw PreconditionError("reciprocity check needs an antipode-closed direction grid");
      worst = std::max(worst, std::abs(f(i, j) - f(neg[std::size_t(j)], neg[std::size_t(i)])));
    }
  return worst;
}

ScatteringMatrix smatrix_from_farfield(const FarField& ff, int L) {
  HarmonicBasis basis{ff.dim, L};
  if (ff.dirs.degree < 2 * L)
    throw PreconditionError(
        "smatrix_from_farfield: direction grid degree must be at least twice the harmonic "
        "truncation");
  MatrixXcd Y = harmonic_matrix(basis, ff.dirs);
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(ff.dirs.w.data(), ff.dirs.size());
  MatrixXcd K = Y.adjoint() * w.asDiagonal() * ff.f * w.asDiagonal() * Y;

  int n = ff.dim;
  cplx c = I * std::exp(I * (PI * (n - 3) / 4.0)) * std::pow(ff.E, (n - 1) / 4.0) *
           std::pow(2 * PI, -(n - 1) / 2.0);
  ScatteringMatrix sm;
  sm.basis = basis;
  sm.E = ff.E;
  sm.S = MatrixXcd::Identity(basis.size(), basis.size()) + c * K;
  double defect = sm.unitarity_defect();
  if (defect > 1e-2)
    std::fprintf(stderr, "warning: scattering matrix unitarity defect %.3e\n", defect);
  return sm;
}

double ScatteringMatrix::unitarity_defect() const {
  MatrixXcd D = S.adjoint() * S - MatrixXcd::Identity(S.rows(), S.cols());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(D);
  double worst = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    worst = std::max(worst, std::abs(es.eigenvalues()[i]));
  return worst;
}

VectorXcd trace_T0(double E, const SampledField& phi, const DirectionGrid& dirs, int L) {
  if (phi.ncomp != 1) throw PreconditionError("trace_T0: field must be scalar");
  const int n = phi.g.dim;
  const double k = std::sqrt(E);
  double c = std::pow(2.0, -0.5) * std::pow(E, (n - 2) / 4.0) * std::pow(2 * PI, -n / 2.0);
  double cell = std::pow(phi.g.h, n);

  VectorXcd t(dirs.size());
  for (int q = 0; q < dirs.size(); ++q) {
    cplx acc = 0;
    for (std::int64_t i = 0; i < phi.g.npts(); ++i)
      acc += std::exp(-I * (k * dot(phi.g.point_of_index(i), dirs.nodes[q]))) * phi.at(0, i);
    t[q] = c * cell * acc;
  }
  HarmonicBasis basis{n, L};
  MatrixXcd Y = harmonic_matrix(basis, dirs);
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(dirs.w.data(), dirs.size());
  return Y.adjoint() * w.asDiagonal() * t;
}

// declared in magnetic.hpp; lives here with the solver machinery
double gauge_invariance_defect(const SampledField& V, const SampledField* A,
                               const GaugeFunction& psi, double E, int L) {
  DirectionGrid dirs = sphere_rule(V.g.dim, 2 * L);
  SampledField base;
  if (A)
    base = *A;
  else
    base = SampledField(V.g, V.g.dim, FieldRole::VectorPotential);
  SampledField shifted = gauge_transform(base, psi);

  ScatteringMatrix s1 = smatrix_from_farfield(far_field(V, A, E, dirs), L);
  ScatteringMatrix s2 = smatrix_from_farfield(far_field(V, &shifted, E, dirs), L);
  Eigen::JacobiSVD<MatrixXcd> svd(s1.S - s2.S);
  return svd.singularValues()[0];
}

}  // namespace scatlab
