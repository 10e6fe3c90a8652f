#include "scatlab/averaged.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "scatlab/ballquad.hpp"

namespace scatlab {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

VectorXcd DensityOnSphere::node_values(const DirectionGrid& dirs) const {
  if (dirs.dim != dim) throw PreconditionError("density: direction grid dimension mismatch");
  HarmonicBasis basis{dim, L};
  if (coef.size() != basis.size())
    throw PreconditionError("density: coefficient count does not match the degree");
  return harmonic_matrix(basis, dirs) * coef;
}

namespace {

constexpr int kMaxThreads = 8;

// rule resolving harmonics up to L and the plane-wave phase across the box
DirectionGrid density_rule(int dim, int L, double E, const Grid& g) {
  double r2 = 0;
  for (int d = 0; d < dim; ++d) r2 += std::pow(g.box_len(d) / 2, 2);
  int reach = int(std::ceil(0.5 * std::exp(1.0) * std::sqrt(E) * std::sqrt(r2)));
  return sphere_rule(dim, std::max(2 * L, L + reach + 8));
}

// one scattering solve per quadrature node on a small thread pool; node q is
// owned by thread q % nthr, so callbacks may write per-node slots freely
void solve_per_node(const SampledField& V, const SampledField* A, double E,
                    const DirectionGrid& dirs, SolveOptions opt,
                    const std::function<void(int thread, int node, const LippmannSchwinger&,
                                             const ScatteringSolution&)>& use) {
  const int nq = dirs.size();
  int nthr = int(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SCATLAB_THREADS")) nthr = std::atoi(env);
  nthr = std::clamp(nthr, 1, std::min(nq, kMaxThreads));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(static_cast<std::size_t>(nthr));
  for (int t = 0; t < nthr; ++t)
    pool.emplace_back([&, t] {
      try {
        LippmannSchwinger ls(V, A, E, opt);
        for (int q = t; q < nq; q += nthr) {
          auto sol = ls.solve(plane_wave(V.g.dim, E, dirs.nodes[q]), dirs.nodes[q]);
          use(t, q, ls, sol);
        }
      } catch (...) {
        errs[std::size_t(t)] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace

SampledField herglotz_nodes(const VectorXcd& fvals, double E, const Grid& g,
                            const DirectionGrid& dirs) {
  if (E <= 0) throw PreconditionError("herglotz: energy must be positive");
  if (dirs.dim != g.dim) throw PreconditionError("herglotz: direction grid dimension mismatch");
  if (fvals.size() != dirs.size())
    throw PreconditionError("herglotz: node value count does not match the rule");
  const double k = std::sqrt(E);
  SampledField out(g, 1, FieldRole::Wavefunction);
  const std::int64_t n = g.npts();
  const int nch = int(std::min<std::int64_t>(n, 64));
  parallel_for(nch, [&](int c) {
    std::int64_t i0 = n * c / nch, i1 = n * (c + 1) / nch;
    for (std::int64_t i = i0; i < i1; ++i) {
      Pt x = g.point_of_index(i);
      cplx acc = 0;
      for (int q = 0; q < dirs.size(); ++q)
        acc += dirs.w[std::size_t(q)] * fvals[q] * std::exp(I * (k * dot(x, dirs.nodes[q])));
      out.at(0, i) = acc;
    }
  });
  return out;
}

SampledField herglotz(const DensityOnSphere& f, double E, const Grid& g,
                      const DirectionGrid& dirs) {
  if (dirs.degree < f.L)
    throw PreconditionError("herglotz: quadrature degree below the density degree");
  return herglotz_nodes(f.node_values(dirs), E, g, dirs);
}

SampledField herglotz(const DensityOnSphere& f, double E, const Grid& g) {
  if (E <= 0) throw PreconditionError("herglotz: energy must be positive");
  return herglotz(f, E, g, density_rule(g.dim, f.L, E, g));
}

SampledField averaged_solution(const SampledField& V, const SampledField* A,
                               const DensityOnSphere& f, double E, const DirectionGrid& dirs,
                               SolveOptions opt) {
  if (dirs.degree < f.L)
    throw PreconditionError("averaged solution: quadrature degree below the density degree");
  VectorXcd fvals = f.node_values(dirs);
  const std::int64_t n = V.g.npts();

  // per-thread partial sums; thread t only ever touches part[t]
  std::vector<std::vector<cplx>> part(kMaxThreads);
  solve_per_node(V, A, E, dirs, opt,
                 [&](int t, int q, const LippmannSchwinger&, const ScatteringSolution& sol) {
                   auto& acc = part[std::size_t(t)];
                   if (acc.empty()) acc.assign(std::size_t(n), cplx(0));
                   cplx wf = dirs.w[std::size_t(q)] * fvals[q];
                   for (std::int64_t i = 0; i < n; ++i) acc[std::size_t(i)] += wf * sol.phi.at(0, i);
                 });

  SampledField out(V.g, 1, FieldRole::Wavefunction);
  for (const auto& acc : part) {
    if (acc.empty()) continue;
    for (std::int64_t i = 0; i < n; ++i) out.at(0, i) += acc[std::size_t(i)];
  }
  return out;
}

SampledField averaged_solution(const SampledField& V, const SampledField* A,
                               const DensityOnSphere& f, double E, SolveOptions opt) {
  return averaged_solution(V, A, f, E, density_rule(V.g.dim, f.L, E, V.g), opt);
}

ScatteringMatrix smatrix_via_representation(const SampledField& V, const SampledField* A,
                                            double E, int L, SolveOptions opt) {
  const int n = V.g.dim;
  DirectionGrid dirs = sphere_rule(n, std::max(2 * L, 4));
  HarmonicBasis basis{n, L};
  const int nb = basis.size(), nq = dirs.size();

  ScatteringMatrix out;
  out.basis = basis;
  out.E = E;

  LippmannSchwinger probe(V, A, E, opt);
  const auto& supp = probe.support_cells();
  if (supp.empty()) {
    out.S = MatrixXcd::Identity(nb, nb);
    return out;
  }
  const std::size_t ns = supp.size();
  const double k = std::sqrt(E);

  // unperturbed averaged solutions on the support cells, one column per node
  MatrixXcd e0(Eigen::Index(ns), nq);
  for (std::size_t s = 0; s < ns; ++s) {
    Pt x = V.g.point_of_index(supp[s]);
    for (int q = 0; q < nq; ++q)
      e0(Eigen::Index(s), q) = std::exp(I * (k * dot(x, dirs.nodes[q])));
  }

  MatrixXcd qmat(Eigen::Index(ns), nq);
  solve_per_node(V, A, E, dirs, opt,
                 [&](int, int q, const LippmannSchwinger& ls, const ScatteringSolution& sol) {
                   qmat.col(q) = ls.q_of(sol);
                 });

  VectorXd w = Eigen::Map<const VectorXd>(dirs.w.data(), nq);
  MatrixXcd phi0 = e0 * (w.asDiagonal() * harmonic_matrix(basis, dirs));
  MatrixXcd qf = qmat * (w.asDiagonal() * harmonic_matrix(basis, dirs));

  const double c = std::pow(E, 0.5 * (n - 2)) / (2 * std::pow(2 * PI, n - 1));
  const double cell = std::pow(V.g.h, n);
  out.S = MatrixXcd::Identity(nb, nb) - (I * c * cell) * (phi0.adjoint() * qf);
  return out;
}

SampledField interior_target(const SampledField& V, const SampledField* A, const Ball& K,
                             const Pt& y, double E, SolveOptions opt) {
  if (norm(y - K.center) <= K.radius)
    throw PreconditionError("interior target: the source point must lie outside the ball");
  for (int d = 0; d < V.g.dim; ++d)
    if (y[d] <= V.g.lo[d] || y[d] >= V.g.hi(d))
      throw PreconditionError("interior target: the source point must lie inside the grid box");
  LippmannSchwinger ls(V, A, E, opt);
  auto sol = ls.solve(green_pole(V.g.dim, E, y));
  if (!std::isfinite(max_abs(sol.phi)))
    throw PreconditionError("interior target: the source point touches the sampled support");
  return sol.phi;
}

DirectionGrid completeness_rule(int dim, int Lmax) {
  return sphere_rule(dim, std::max(2 * Lmax, Lmax + 8));
}

CompletenessReport completeness_residual(const SampledField& V, const SampledField* A,
                                         const Ball& K, double E,
                                         const std::vector<TargetField>& targets,
                                         const std::vector<int>& degrees, SolveOptions opt) {
  const Grid& g = V.g;
  const int n = g.dim;
  if (degrees.empty()) throw PreconditionError("completeness: need at least one degree");
  if (degrees.front() < 0) throw PreconditionError("completeness: degrees must be nonnegative");
  for (std::size_t i = 1; i < degrees.size(); ++i)
    if (degrees[i] <= degrees[i - 1])
      throw PreconditionError("completeness: degrees must increase strictly");
  if (targets.empty()) throw PreconditionError("completeness: need at least one target");
  for (const auto& t : targets)
    if (!t.u.g.same_as(g)) throw PreconditionError("completeness: target grid mismatch");
  for (int d = 0; d < n; ++d)
    if (K.center[d] - K.radius <= g.lo[d] || K.center[d] + K.radius >= g.hi(d))
      throw PreconditionError("completeness: the ball must lie strictly inside the grid box");

  std::vector<double> wk = ball_weights(g, K.center, K.radius);
  std::vector<std::int64_t> cells;
  for (std::int64_t i = 0; i < g.npts(); ++i)
    if (wk[std::size_t(i)] > 0) cells.push_back(i);
  const Eigen::Index nc = Eigen::Index(cells.size());
  VectorXd sw(nc);
  for (Eigen::Index j = 0; j < nc; ++j) sw[j] = std::sqrt(wk[std::size_t(cells[std::size_t(j)])]);

  const int Lmax = degrees.back();
  DirectionGrid dirs = completeness_rule(n, Lmax);
  HarmonicBasis basis{n, Lmax};
  const int nb = basis.size(), nq = dirs.size();

  // scattering solutions restricted to the cells meeting K
  MatrixXcd phin(nc, nq);
  solve_per_node(V, A, E, dirs, opt,
                 [&](int, int q, const LippmannSchwinger&, const ScatteringSolution& sol) {
                   for (Eigen::Index j = 0; j < nc; ++j)
                     phin(j, q) = sol.phi.at(0, cells[std::size_t(j)]);
                 });

  VectorXd wq = Eigen::Map<const VectorXd>(dirs.w.data(), nq);
  MatrixXcd fam = phin * (wq.asDiagonal() * harmonic_matrix(basis, dirs));
  MatrixXcd B = sw.asDiagonal() * fam;

  MatrixXcd T(nc, Eigen::Index(targets.size()));
  for (Eigen::Index jt = 0; jt < T.cols(); ++jt)
    for (Eigen::Index j = 0; j < nc; ++j)
      T(j, jt) = sw[j] * targets[std::size_t(jt)].u.at(0, cells[std::size_t(j)]);

  CompletenessReport rep;
  rep.dim = n;
  rep.E = E;
  rep.K = K;
  rep.degrees = degrees;
  for (const auto& t : targets) rep.targets.push_back(t.name);
  rep.residual.resize(Eigen::Index(degrees.size()), T.cols());

  for (std::size_t di = 0; di < degrees.size(); ++di) {
    std::vector<int> sel;
    for (int idx = 0; idx < nb; ++idx)
      if (basis.l_of(idx) <= degrees[di]) sel.push_back(idx);
    MatrixXcd BL(nc, Eigen::Index(sel.size()));
    for (std::size_t c = 0; c < sel.size(); ++c) BL.col(Eigen::Index(c)) = B.col(sel[c]);

    Eigen::JacobiSVD<MatrixXcd> svd(BL, Eigen::ComputeThinU);
    const VectorXd& sv = svd.singularValues();
    double cut = 1e-10 * sv[0];
    int rank = 0;
    while (rank < sv.size() && sv[rank] > cut) ++rank;
    rep.cutoff.push_back(cut);
    rep.rank.push_back(rank);
    rep.dropped.push_back(int(sel.size()) - rank);
    rep.gram_cond.push_back(rank > 0 ? std::pow(sv[0] / sv[rank - 1], 2) : 0.0);
    rep.gram_eigs.emplace_back(sv.array().square());

    MatrixXcd U = svd.matrixU().leftCols(rank);
    for (Eigen::Index jt = 0; jt < T.cols(); ++jt) {
      VectorXcd t = T.col(jt);
      double tn = t.norm();
      double rn = (t - U * (U.adjoint() * t)).norm();
      rep.residual(Eigen::Index(di), jt) = tn > 0 ? rn / tn : 0.0;
    }
  }
  return rep;
}

std::vector<TargetField> default_completeness_targets(const SampledField& V,
                                                      const SampledField* A, const Ball& K,
                                                      double E, int held_degree,
                                                      SolveOptions opt) {
  const int n = V.g.dim;
  Pt axes[3];
  if (n == 2) {
    axes[0] = {1, 0};
    axes[1] = {0, -1};
    axes[2] = {-std::sqrt(0.5), std::sqrt(0.5)};
  } else {
    axes[0] = {1, 0, 0};
    axes[1] = {0, -1, 0};
    double s = std::sqrt(1.0 / 3.0);
    axes[2] = {-s, s, s};
  }
  std::vector<TargetField> out;
  for (int i = 0; i < 3; ++i) {
    Pt y = K.center + (K.radius * (1.25 + 0.15 * i)) * axes[i];
    out.push_back({"pole" + std::to_string(i), interior_target(V, A, K, y, E, opt)});
  }

  DensityOnSphere f;
  f.dim = n;
  f.L = held_degree;
  HarmonicBasis hb{n, held_degree};
  f.coef = VectorXcd::Zero(hb.size());
  for (int idx = 0; idx < hb.size(); ++idx)
    if (hb.l_of(idx) == held_degree)
      f.coef[idx] = cplx(1.0 / (1.0 + std::abs(hb.m_of(idx))), 0.25 * hb.m_of(idx));
  f.coef /= f.coef.norm();
  out.push_back({"held-out averaged", averaged_solution(V, A, f, E, opt)});
  return out;
}

}  // namespace scatlab
