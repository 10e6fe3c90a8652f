#include "scatlab/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "scatlab/ballquad.hpp"
#include "scatlab/magnetic.hpp"

namespace scatlab {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

constexpr int kMaxThreads = 8;

// one scattering solve per quadrature node on a small thread pool; node q is
// owned by thread q % nthr, so callbacks may write per-node slots freely
void solve_per_node(const SampledField& V, const SampledField* A, double E,
                    const DirectionGrid& dirs, SolveOptions opt,
                    const std::function<void(int node, const ScatteringSolution&)>& use) {
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
        for (int q = t; q < nq; q += nthr)
          use(q, ls.solve(plane_wave(V.g.dim, E, dirs.nodes[std::size_t(q)]),
                          dirs.nodes[std::size_t(q)]));
      } catch (...) {
        errs[std::size_t(t)] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

// rule resolving harmonics up to L and the plane-wave phase across the ball
int pairing_degree(int L, double E, double R) {
  int reach = int(std::ceil(0.5 * std::exp(1.0) * std::sqrt(E) * R));
  return std::max(2 * L, L + reach + 8);
}

const SampledField* opt_ptr(const std::optional<SampledField>& f) {
  return f ? &*f : nullptr;
}

double pair_scale(const ScenarioPair& pair) {
  double s = std::max(max_abs(pair.V1), max_abs(pair.V2));
  for (const auto* f : {&pair.A1, &pair.A2, &pair.F1, &pair.F2})
    if (*f) s = std::max(s, max_abs(**f));
  return std::max(s, 1e-30);
}

void check_pair(const ScenarioPair& pair) {
  const Grid& g = pair.V1.g;
  if (!pair.V2.g.same_as(g)) throw PreconditionError("pair potentials must share one grid");
  if ((pair.A1 || pair.A2) && g.dim != 3)
    throw PreconditionError("vector potentials need a three-dimensional pair");
  double d = pair_annulus_defect(pair);
  if (d > 1e-10 * pair_scale(pair))
    throw PreconditionError("pair potentials must agree outside the ball of radius R "
                            "(annulus defect " + std::to_string(d) + ")");
}

// solutions of both potentials at the rule nodes, gathered on the cells of
// the pairing ball; gradients only when a vector potential is present
struct PairFields {
  DirectionGrid dirs;
  std::vector<std::int64_t> cells;
  VectorXd wb;
  MatrixXcd phi1, phi2;
  std::array<MatrixXcd, 3> gr1, gr2;
  bool magnetic = false;
};

PairFields gather_pair(const ScenarioPair& pair, double E, int L, const SolveOptions& opt) {
  check_pair(pair);
  const Grid& g = pair.V1.g;
  PairFields pf;
  pf.magnetic = pair.A1.has_value() || pair.A2.has_value();
  pf.dirs = sphere_rule(g.dim, pairing_degree(L, E, pair.R));
  auto wball = ball_weights(g, {}, pair.R);
  for (std::int64_t i = 0; i < g.npts(); ++i)
    if (wball[std::size_t(i)] > 0) pf.cells.push_back(i);
  pf.wb.resize(Eigen::Index(pf.cells.size()));
  for (std::size_t c = 0; c < pf.cells.size(); ++c)
    pf.wb[Eigen::Index(c)] = wball[std::size_t(pf.cells[c])];

  auto nc = Eigen::Index(pf.cells.size());
  auto nq = Eigen::Index(pf.dirs.size());
  for (int pot = 0; pot < 2; ++pot) {
    const SampledField& V = pot == 0 ? pair.V1 : pair.V2;
    const SampledField* A = opt_ptr(pot == 0 ? pair.A1 : pair.A2);
    MatrixXcd& phi = pot == 0 ? pf.phi1 : pf.phi2;
    auto& gr = pot == 0 ? pf.gr1 : pf.gr2;
    phi.resize(nc, nq);
    if (pf.magnetic)
      for (int d = 0; d < 3; ++d) gr[std::size_t(d)].resize(nc, nq);
    solve_per_node(V, A, E, pf.dirs, opt, [&](int q, const ScatteringSolution& sol) {
      for (Eigen::Index c = 0; c < nc; ++c) {
        std::int64_t i = pf.cells[std::size_t(c)];
        phi(c, q) = sol.phi.at(0, i);
        if (pf.magnetic)
          for (int d = 0; d < 3; ++d) gr[std::size_t(d)](c, q) = sol.grad.at(d, i);
      }
    });
  }
  return pf;
}

// pairing of the potential difference against the synthesized solutions,
// given the coefficient matrices over whole density batches: column j of
// m1/m2 holds phi1_{f_j} resp. phi2_{g_j} at the ball cells
MatrixXcd assemble_pairing(const ScenarioPair& pair, const PairFields& pf, const MatrixXcd& m1,
                           const MatrixXcd& m2, const std::array<MatrixXcd, 3>& mg1,
                           const std::array<MatrixXcd, 3>& mg2) {
  auto nc = Eigen::Index(pf.cells.size());
  VectorXcd dv(nc), asq(nc);
  std::array<VectorXcd, 3> da;
  for (auto& v : da) v.resize(nc);
  for (Eigen::Index c = 0; c < nc; ++c) {
    std::int64_t i = pf.cells[std::size_t(c)];
    dv[c] = pair.V2.at(0, i) - pair.V1.at(0, i);
    if (pf.magnetic) {
      cplx a1s = 0, a2s = 0;
      for (int d = 0; d < 3; ++d) {
        cplx a1 = pair.A1 ? pair.A1->at(d, i) : cplx(0);
        cplx a2 = pair.A2 ? pair.A2->at(d, i) : cplx(0);
        a1s += a1 * a1;
        a2s += a2 * a2;
        da[std::size_t(d)][c] = a2 - a1;
      }
      asq[c] = a1s - a2s;
    }
  }
  VectorXcd wbc = pf.wb.cast<cplx>();
  if (!pf.magnetic)
    return m1.transpose() * (wbc.array() * dv.array()).matrix().asDiagonal() * m2.conjugate();
  // i Int (A2-A1).(phi1 grad conj(phi2) - conj(phi2) grad phi1)
  //   + Int (A1^2 - A2^2 + V1 - V2) phi1 conj(phi2)
  MatrixXcd F = m1.transpose() * (wbc.array() * (asq.array() - dv.array())).matrix().asDiagonal() *
                m2.conjugate();
  for (int d = 0; d < 3; ++d) {
    VectorXcd wda = (wbc.array() * da[std::size_t(d)].array()).matrix();
    F += I * (m1.transpose() * wda.asDiagonal() * mg2[std::size_t(d)].conjugate() -
              mg1[std::size_t(d)].transpose() * wda.asDiagonal() * m2.conjugate());
  }
  return F;
}

}  // namespace

PointField oracle_field(const PartialWaveResult& pw, const Pt& omega) {
  Pt w = (1.0 / norm(omega)) * omega;
  PointField f;
  f.value = [pw, w](const Pt& x) { return pw.total_field(x, w); };
  f.gradient = [pw, w](const Pt& x, cplx* out) { pw.total_gradient(x, w, out); };
  return f;
}

namespace {

// second-difference residual of (H0 + V - E) phi at probe points away from
// the jump spheres; loose threshold, catches fields that are not solutions
void check_solution(const PotentialSpec& spec, const PointField& phi, double E, double R,
                    int dim, double h) {
  double delta = h / 4;
  std::vector<Pt> probes;
  for (double fr : {0.35, 0.6, 0.85})
    for (int j = 0; j < 6; ++j) {
      double th = (0.37 + j) * PI / 3;
      if (dim == 2) {
        probes.push_back({fr * R * std::cos(th), fr * R * std::sin(th)});
      } else {
        double ph = (0.61 + 2 * j) * PI / 7;
        probes.push_back({fr * R * std::sin(ph) * std::cos(th),
                          fr * R * std::sin(ph) * std::sin(th), fr * R * std::cos(ph)});
      }
    }
  double worst = 0;
  for (const Pt& x : probes) {
    bool nearjump = false;
    for (const auto& t : spec.electric)
      if (t.family == "well" && std::abs(norm(x - t.center) - t.radius) < 3 * delta)
        nearjump = true;
    if (nearjump) continue;
    cplx v0 = phi.value(x), lap = 0;
    for (int d = 0; d < dim; ++d) {
      Pt xp = x, xm = x;
      xp[d] += delta;
      xm[d] -= delta;
      lap += phi.value(xp) - 2.0 * v0 + phi.value(xm);
    }
    lap /= delta * delta;
    double scale = (std::abs(E) + std::abs(spec.eval_V(x)) + 1) * std::max(std::abs(v0), 1e-6);
    worst = std::max(worst, std::abs(-lap + (spec.eval_V(x) - E) * v0) / scale);
  }
  if (worst > 2e-2)
    throw PreconditionError("field fails the equation at the probe points (relative residual " +
                            std::to_string(worst) + "); pass solved fields");
}

}  // namespace

std::pair<cplx, cplx> green_identity_defect(const PotentialSpec& v1, const PotentialSpec& v2,
                                            const PointField& phi1, const PointField& phi2,
                                            double E, double R, const Grid& g) {
  if (v1.dim != g.dim || v2.dim != g.dim)
    throw PreconditionError("potential dimensions must match the grid");
  if (v1.has_magnetic() || v2.has_magnetic())
    throw PreconditionError("the pairing here handles electric potentials only");
  for (const auto* v : {&v1, &v2})
    for (const auto& t : v->electric)
      if (t.family == "well" && norm(t.center) + t.radius > R)
        throw PreconditionError("well term sticks out of the pairing ball");
  check_solution(v1, phi1, E, R, g.dim, g.h);
  check_solution(v2, phi2, E, R, g.dim, g.h);

  // wells get their own cut-cell weights so the jump spheres are resolved;
  // what remains of the difference is smooth and integrates over the R ball
  PotentialSpec s1 = v1, s2 = v2;
  auto drop_wells = [](PotentialSpec& s) {
    s.electric.erase(std::remove_if(s.electric.begin(), s.electric.end(),
                                    [](const ElectricTerm& t) { return t.family == "well"; }),
                     s.electric.end());
  };
  drop_wells(s1);
  drop_wells(s2);
  struct WellQuad {
    double amp;
    std::vector<double> w;
  };
  std::vector<WellQuad> wells;
  for (const auto& t : v1.electric)
    if (t.family == "well") wells.push_back({t.amplitude, ball_weights(g, t.center, t.radius)});
  for (const auto& t : v2.electric)
    if (t.family == "well") wells.push_back({-t.amplitude, ball_weights(g, t.center, t.radius)});
  auto wB = ball_weights(g, {}, R);

  std::int64_t np = g.npts();
  std::vector<cplx> part(kMaxThreads, cplx(0));
  parallel_for(kMaxThreads, [&](int t) {
    cplx acc = 0;
    for (std::int64_t i = t; i < np; i += kMaxThreads) {
      double w0 = wB[std::size_t(i)];
      bool active = w0 > 0;
      for (const auto& wq : wells) active = active || wq.w[std::size_t(i)] > 0;
      if (!active) continue;
      Pt x = g.point_of_index(i);
      cplx prod = phi1.value(x) * std::conj(phi2.value(x));
      cplx cell = w0 * (s1.eval_V(x) - s2.eval_V(x)) * prod;
      for (const auto& wq : wells) cell += wq.amp * wq.w[std::size_t(i)] * prod;
      acc += cell;
    }
    part[std::size_t(t)] = acc;
  });
  cplx vol = 0;
  for (const auto& p : part) vol += p;

  int bdeg = std::max(16, int(std::ceil(std::exp(1.0) * std::sqrt(E) * R)) + 8);
  DirectionGrid rule = sphere_rule(g.dim, bdeg);
  cplx bnd = 0;
  for (int q = 0; q < rule.size(); ++q) {
    Pt nu = rule.nodes[std::size_t(q)];
    Pt x = R * nu;
    cplx g1[3] = {0, 0, 0}, g2[3] = {0, 0, 0};
    phi1.gradient(x, g1);
    phi2.gradient(x, g2);
    cplx dn1 = 0, dn2 = 0;
    for (int d = 0; d < g.dim; ++d) {
      dn1 += nu[d] * g1[d];
      dn2 += nu[d] * g2[d];
    }
    bnd += rule.w[std::size_t(q)] *
           (std::conj(phi2.value(x)) * dn1 - phi1.value(x) * std::conj(dn2));
  }
  bnd *= std::pow(R, g.dim - 1);
  return {vol, bnd};
}

double pair_annulus_defect(const ScenarioPair& pair) {
  const Grid& g = pair.V1.g;
  auto comp_defect = [&](const SampledField* a, const SampledField* b, std::int64_t i) {
    int nc = std::max(a ? a->ncomp : 0, b ? b->ncomp : 0);
    double d = 0;
    for (int c = 0; c < nc; ++c)
      d = std::max(d, std::abs((a ? a->at(c, i) : cplx(0)) - (b ? b->at(c, i) : cplx(0))));
    return d;
  };
  double d = 0;
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    if (norm(g.point_of_index(i)) <= pair.R) continue;
    d = std::max(d, std::abs(pair.V1.at(0, i) - pair.V2.at(0, i)));
    d = std::max(d, comp_defect(opt_ptr(pair.A1), opt_ptr(pair.A2), i));
    d = std::max(d, comp_defect(opt_ptr(pair.F1), opt_ptr(pair.F2), i));
  }
  return d;
}

cplx pairing_constant(int dim, double E) {
  return I * 2.0 * std::pow(2 * PI, dim - 1) * std::pow(E, -0.5 * (dim - 2));
}

cplx orthogonality_functional(const ScenarioPair& pair, const DensityOnSphere& f,
                              const DensityOnSphere& g, double E, SolveOptions opt) {
  PairFields pf = gather_pair(pair, E, std::max(f.L, g.L), opt);
  VectorXcd wf = f.node_values(pf.dirs);
  VectorXcd wg = g.node_values(pf.dirs);
  for (int q = 0; q < pf.dirs.size(); ++q) {
    wf[q] *= pf.dirs.w[std::size_t(q)];
    wg[q] *= pf.dirs.w[std::size_t(q)];
  }
  MatrixXcd m1 = pf.phi1 * wf, m2 = pf.phi2 * wg;
  std::array<MatrixXcd, 3> mg1, mg2;
  if (pf.magnetic)
    for (int d = 0; d < 3; ++d) {
      mg1[std::size_t(d)] = pf.gr1[std::size_t(d)] * wf;
      mg2[std::size_t(d)] = pf.gr2[std::size_t(d)] * wg;
    }
  return assemble_pairing(pair, pf, m1, m2, mg1, mg2)(0, 0);
}

MatrixXcd orthogonality_matrix(const ScenarioPair& pair, double E, int L, SolveOptions opt) {
  PairFields pf = gather_pair(pair, E, L, opt);
  HarmonicBasis basis{pair.V1.g.dim, L};
  MatrixXcd Y = harmonic_matrix(basis, pf.dirs);
  for (int q = 0; q < pf.dirs.size(); ++q) Y.row(q) *= pf.dirs.w[std::size_t(q)];
  MatrixXcd m1 = pf.phi1 * Y, m2 = pf.phi2 * Y;
  std::array<MatrixXcd, 3> mg1, mg2;
  if (pf.magnetic)
    for (int d = 0; d < 3; ++d) {
      mg1[std::size_t(d)] = pf.gr1[std::size_t(d)] * Y;
      mg2[std::size_t(d)] = pf.gr2[std::size_t(d)] * Y;
    }
  return assemble_pairing(pair, pf, m1, m2, mg1, mg2);
}

bool UniquenessReport::finite() const {
  for (double x : {s_diff, s_diff_rep, unitarity1, unitarity2, v_diff, f_diff,
                   functional_defect})
    if (!std::isfinite(x)) return false;
  for (Eigen::Index j = 0; j < functional.size(); ++j) {
    cplx v = functional(j);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

namespace {

double spectral_norm(const MatrixXcd& M) {
  if (M.size() == 0) return 0;
  return M.jacobiSvd().singularValues()(0);
}

// indices of the degree <= L harmonics inside the degree <= Lbig basis
std::vector<int> basis_embedding(int dim, int L, int Lbig) {
  HarmonicBasis small{dim, L}, big{dim, Lbig};
  std::vector<int> sel(std::size_t(small.size()));
  for (int j = 0; j < small.size(); ++j)
    sel[std::size_t(j)] = big.index_of(small.l_of(j), small.m_of(j));
  return sel;
}

MatrixXcd subblock(const MatrixXcd& M, const std::vector<int>& sel) {
  MatrixXcd out(Eigen::Index(sel.size()), Eigen::Index(sel.size()));
  for (std::size_t i = 0; i < sel.size(); ++i)
    for (std::size_t j = 0; j < sel.size(); ++j)
      out(Eigen::Index(i), Eigen::Index(j)) = M(sel[i], sel[j]);
  return out;
}

}  // namespace

UniquenessReport scenario_uniqueness(const ScenarioPair& pair, double E, int L,
                                     const ScenarioOptions& opt) {
  check_pair(pair);
  const Grid& g = pair.V1.g;
  const SampledField* A1 = opt_ptr(pair.A1);
  const SampledField* A2 = opt_ptr(pair.A2);

  UniquenessReport rep;
  rep.name1 = pair.name1;
  rep.name2 = pair.name2;
  rep.E = E;
  rep.L = L;
  int Lf = opt.functional_L >= 0 ? opt.functional_L : L;
  int Lc = std::max(L, Lf + 2);  // headroom for the contract product below

  DirectionGrid fdirs = sphere_rule(g.dim, std::max(2 * Lc, 2));
  FarField ff1 = far_field(pair.V1, A1, E, fdirs, opt.solve);
  FarField ff2 = far_field(pair.V2, A2, E, fdirs, opt.solve);
  ScatteringMatrix S1 = smatrix_from_farfield(ff1, Lc);
  ScatteringMatrix S2 = smatrix_from_farfield(ff2, Lc);
  rep.unitarity1 = S1.unitarity_defect();
  rep.unitarity2 = S2.unitarity_defect();
  auto selL = basis_embedding(g.dim, L, Lc);
  rep.s_diff = spectral_norm(subblock(S1.S, selL) - subblock(S2.S, selL));

  ScatteringMatrix R1 = smatrix_via_representation(pair.V1, A1, E, L, opt.solve);
  ScatteringMatrix R2 = smatrix_via_representation(pair.V2, A2, E, L, opt.solve);
  rep.s_diff_rep = spectral_norm(R1.S - R2.S);

  auto wb = ball_weights(g, {}, pair.R);
  double v2sum = 0, f2sum = 0;
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    if (wb[std::size_t(i)] <= 0) continue;
    v2sum += wb[std::size_t(i)] * std::norm(pair.V1.at(0, i) - pair.V2.at(0, i));
    if (pair.F1 || pair.F2) {
      int nc = std::max(pair.F1 ? pair.F1->ncomp : 0, pair.F2 ? pair.F2->ncomp : 0);
      for (int c = 0; c < nc; ++c)
        f2sum += wb[std::size_t(i)] * std::norm((pair.F1 ? pair.F1->at(c, i) : cplx(0)) -
                                                (pair.F2 ? pair.F2->at(c, i) : cplx(0)));
    }
  }
  rep.v_diff = std::sqrt(v2sum);
  rep.f_diff = std::sqrt(f2sum);

  rep.functional = orthogonality_matrix(pair, E, Lf, opt.solve);
  // electric pairing equals (i/c) (S2^* (S2 - S1) f, g); with vector
  // potentials present the sign of the difference flips
  bool mag = pair.A1.has_value() || pair.A2.has_value();
  MatrixXcd D = mag ? MatrixXcd(S1.S - S2.S) : MatrixXcd(S2.S - S1.S);
  MatrixXcd contract_big = pairing_constant(g.dim, E) * (S2.S.adjoint() * D);
  auto self = basis_embedding(g.dim, Lf, Lc);
  MatrixXcd contract = subblock(contract_big, self).transpose();
  double den = std::max({rep.functional.cwiseAbs().maxCoeff(), contract.cwiseAbs().maxCoeff(),
                         1e-300});
  rep.functional_defect = (rep.functional - contract).cwiseAbs().maxCoeff() / den;

  rep.manifest = {
      {"version", kVersion},
      {"pair", {pair.name1, pair.name2}},
      {"E", E},
      {"L", L},
      {"R", pair.R},
      {"magnetic", mag},
      {"grid",
       {{"dim", g.dim},
        {"n", {g.n[0], g.n[1], g.n[2]}},
        {"h", g.h},
        {"lo", {g.lo[0], g.lo[1], g.lo[2]}}}},
      {"rules",
       {{"far_degree", fdirs.degree}, {"pairing_degree", pairing_degree(Lf, E, pair.R)}}},
      {"solve",
       {{"tol", opt.solve.tol}, {"restart", opt.solve.restart}, {"maxiter", opt.solve.maxiter}}},
  };

  if (opt.run_fourier) {
    FourierDifference fd = fourier_difference(pair, E, opt.fourier);
    rep.reconstruction_error = fd.rel_error;
    rep.manifest["fourier"] = {{"xi_max", opt.fourier.xi_max},
                               {"dxi", opt.fourier.dxi},
                               {"epsilon", fd.epsilon},
                               {"flagged", fd.flagged},
                               {"max_error", fd.max_error},
                               {"rel_error", fd.rel_error}};
  }
  return rep;
}

namespace {

// smooth ramp-down from one at rc to zero at rt
double outer_taper(double r, double rc, double rt) {
  if (r <= rc) return 1;
  if (r >= rt) return 0;
  return 1 - inner_ramp(0.2 + 0.3 * (r - rc) / (rt - rc));
}

int first_differing_term(const ExpansionSpec& a, const ExpansionSpec& b) {
  std::size_t n = std::min(a.terms.size(), b.terms.size());
  for (std::size_t j = 0; j < n; ++j) {
    const auto& ta = a.terms[j];
    const auto& tb = b.terms[j];
    if (ta.magnetic != tb.magnetic || ta.order != tb.order || ta.l != tb.l || ta.m != tb.m ||
        ta.coeff != tb.coeff)
      return int(j);
  }
  if (a.terms.size() != b.terms.size()) return int(n);
  return -1;
}

}  // namespace

UniquenessReport expansion_pipeline(const ExpansionScenario& sc, double E, const Grid& g, int L,
                                    const ScenarioOptions& opt) {
  if (g.dim != 3) throw PreconditionError("expansion_pipeline needs a three-dimensional grid");
  if (sc.interior1.dim != 3 || sc.interior2.dim != 3)
    throw PreconditionError("interior parts must be three-dimensional");
  sc.far1.validate();
  sc.far2.validate();

  double half = g.box_len(0) / 2;
  for (int d = 1; d < g.dim; ++d) half = std::min(half, g.box_len(d) / 2);
  double rt = 0.45 * half;  // taper end keeps the sample inside the solver's support box
  double rc = 0.72 * rt;
  double rramp = sc.R;  // profiles vanish below 0.2 R, so the origin cell is safe

  auto add_far = [&](const ExpansionSpec& far, SampledField& V, SampledField& A) {
    std::int64_t np = g.npts();
    for (std::int64_t i = 0; i < np; ++i) {
      Pt x = g.point_of_index(i);
      double r = norm(x);
      double ramp = inner_ramp(r / rramp) * outer_taper(r, rc, rt);
      if (ramp == 0 || r == 0) continue;
      Pt xhat = (1 / r) * x;
      for (const auto& t : far.terms) {
        double y = real_harmonic(3, t.l, t.m, xhat);
        if (!t.magnetic) {
          V.at(0, i) += t.coeff * ramp * std::pow(r, -t.order) * y;
        } else {
          // axial stream profile: the curl then carries the declared order
          A.at(2, i) += t.coeff * ramp * std::pow(r, 1 - t.order) * y;
        }
      }
    }
  };
  auto add_interior_a = [&](const PotentialSpec& spec, SampledField& A) {
    if (!spec.has_magnetic()) return;
    const MagneticSpec& m = *spec.magnetic;
    std::int64_t np = g.npts();
    for (std::int64_t i = 0; i < np; ++i) {
      Pt x = g.point_of_index(i) - m.center;
      double env = std::exp(-dot(x, x) / (2 * m.sigma * m.sigma));
      for (int d = 0; d < 3; ++d) A.at(d, i) += m.amplitude[d] * env;
    }
  };

  ScenarioPair pr;
  pr.name1 = sc.name1;
  pr.name2 = sc.name2;
  pr.R = sc.R;
  bool mag1 = sc.interior1.has_magnetic() ||
              std::any_of(sc.far1.terms.begin(), sc.far1.terms.end(),
                          [](const ExpansionTerm& t) { return t.magnetic; });
  bool mag2 = sc.interior2.has_magnetic() ||
              std::any_of(sc.far2.terms.begin(), sc.far2.terms.end(),
                          [](const ExpansionTerm& t) { return t.magnetic; });
  bool any_mag = mag1 || mag2;
  for (int pot = 0; pot < 2; ++pot) {
    const PotentialSpec& interior = pot == 0 ? sc.interior1 : sc.interior2;
    const ExpansionSpec& far = pot == 0 ? sc.far1 : sc.far2;
    SampledField V = sample_potential(interior, g);
    SampledField A(g, 3, FieldRole::VectorPotential);
    add_far(far, V, A);
    add_interior_a(interior, A);
    if (pot == 0) {
      pr.V1 = std::move(V);
      if (any_mag) {
        pr.F1 = curl(A);
        pr.A1 = std::move(A);
      }
    } else {
      pr.V2 = std::move(V);
      if (any_mag) {
        pr.F2 = curl(A);
        pr.A2 = std::move(A);
      }
    }
  }

  double defect = pair_annulus_defect(pr);
  if (defect > 1e-10 * pair_scale(pr)) {
    int differ = first_differing_term(sc.far1, sc.far2);
    if (differ >= 0)
      throw PreconditionError("expansions disagree beyond the agreement radius; first differing "
                              "term " + std::to_string(differ));
    throw PreconditionError("interior parts leak beyond the agreement radius (annulus defect " +
                            std::to_string(defect) + ")");
  }

  UniquenessReport rep = scenario_uniqueness(pr, E, L, opt);
  double tail = 0;
  DirectionGrid probe = sphere_rule(3, 8);
  for (const auto* far : {&sc.far1, &sc.far2})
    for (const auto& t : far->terms)
      for (const auto& nu : probe.nodes) {
        double y = std::abs(real_harmonic(3, t.l, t.m, nu));
        tail = std::max(tail, std::abs(t.coeff) * std::pow(rc, -t.order) * y);
      }
  rep.manifest["expansion"] = {{"taper_start", rc},
                               {"taper_end", rt},
                               {"inner_ramp_scale", rramp},
                               {"discarded_tail_sup", tail}};
  return rep;
}

}  // namespace scatlab
