#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scatlab/averaged.hpp"
#include "scatlab/ballquad.hpp"
#include "scatlab/special.hpp"

using namespace scatlab;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

PotentialSpec well_spec(int dim, double amp, double radius) {
  PotentialSpec s;
  s.dim = dim;
  ElectricTerm t;
  t.family = "well";
  t.amplitude = amp;
  t.radius = radius;
  s.electric.push_back(t);
  return s;
}

PotentialSpec gaussian_spec(int dim, double amp, double sigma) {
  PotentialSpec s;
  s.dim = dim;
  ElectricTerm t;
  t.family = "gaussian";
  t.amplitude = amp;
  t.sigma = sigma;
  s.electric.push_back(t);
  return s;
}

DensityOnSphere unit_density(int dim, int L, int idx) {
  DensityOnSphere f;
  f.dim = dim;
  f.L = L;
  f.coef = VectorXcd::Zero(HarmonicBasis{dim, L}.size());
  f.coef[idx] = 1.0;
  return f;
}

DensityOnSphere mixed_density(int dim, int L) {
  DensityOnSphere f;
  f.dim = dim;
  f.L = L;
  HarmonicBasis b{dim, L};
  f.coef.resize(b.size());
  for (int i = 0; i < b.size(); ++i)
    f.coef[i] = cplx(std::cos(1.7 * i + 0.3), std::sin(0.9 * i - 1.1)) / (1.0 + i);
  return f;
}

}  // namespace

TEST_CASE("herglotz waves match the plane-wave expansion closed forms") {
  SUBCASE("2D: sqrt(2 pi) i^m J_m(kr) e^{im theta}") {
    double E = 1.3, k = std::sqrt(E);
    Grid g = Grid::cube(2, 1.1, 24);
    HarmonicBasis basis{2, 3};
    for (int idx = 0; idx < basis.size(); ++idx) {
      SampledField phi = herglotz(unit_density(2, 3, idx), E, g);
      int m = basis.m_of(idx);
      double worst = 0;
      for (std::int64_t i = 0; i < g.npts(); i += 7) {
        Pt x = g.point_of_index(i);
        double r = norm(x);
        if (r < 0.15) continue;
        Pt xhat = (1.0 / r) * x;
        cplx expect = 2 * PI * std::pow(I, std::abs(m)) * sf::bessel_J(std::abs(m), k * r) *
                      sf::circ_harmonic(m, xhat);
        worst = std::max(worst, std::abs(phi.at(0, i) - expect));
      }
      CHECK(worst < 1e-10);
    }
  }
  SUBCASE("3D: 4 pi i^l j_l(kr) Y_lm") {
    double E = 1.3, k = std::sqrt(E);
    Grid g = Grid::cube(3, 0.9, 14);
    HarmonicBasis basis{3, 2};
    for (int idx = 0; idx < basis.size(); ++idx) {
      SampledField phi = herglotz(unit_density(3, 2, idx), E, g);
      int l = basis.l_of(idx), m = basis.m_of(idx);
      double worst = 0;
      for (std::int64_t i = 0; i < g.npts(); i += 11) {
        Pt x = g.point_of_index(i);
        double r = norm(x);
        if (r < 0.15) continue;
        Pt xhat = (1.0 / r) * x;
        cplx expect = 4 * PI * std::pow(I, l) * sf::sph_j(l, k * r) * sf::sph_harmonic(l, m, xhat);
        worst = std::max(worst, std::abs(phi.at(0, i) - expect));
      }
      CHECK(worst < 1e-10);
    }
  }
}

TEST_CASE("zero density gives the zero field") {
  Grid g = Grid::cube(2, 1.0, 16);
  DensityOnSphere f = unit_density(2, 2, 0);
  f.coef.setZero();
  CHECK(max_abs(herglotz(f, 1.0, g)) == 0.0);
}

TEST_CASE("shift phase on the density translates the wave") {
  double E = 1.44, k = std::sqrt(E);
  Grid g = Grid::cube(2, 1.0, 20);
  DirectionGrid dirs = sphere_rule(2, 10);
  VectorXcd fvals = mixed_density(2, 2).node_values(dirs);
  Pt y{0.3, -0.2};

  VectorXcd shifted(fvals.size());
  for (int q = 0; q < dirs.size(); ++q)
    shifted[q] = fvals[q] * std::exp(-I * (k * dot(y, dirs.nodes[q])));
  SampledField a = herglotz_nodes(shifted, E, g, dirs);

  Grid g2 = g;
  for (int d = 0; d < 2; ++d) g2.lo[d] -= y[d];
  SampledField b = herglotz_nodes(fvals, E, g2, dirs);

  double worst = 0;
  for (std::int64_t i = 0; i < g.npts(); ++i) worst = std::max(worst, std::abs(a.at(0, i) - b.at(0, i)));
  CHECK(worst < 1e-8);
}

TEST_CASE("coefficient norm equals the quadrature norm of the node values") {
  SUBCASE("2D") {
    DensityOnSphere f = mixed_density(2, 5);
    DirectionGrid dirs = sphere_rule(2, 5);
    VectorXcd v = f.node_values(dirs);
    double s = 0;
    for (int q = 0; q < dirs.size(); ++q) s += dirs.w[std::size_t(q)] * std::norm(v[q]);
    CHECK(std::abs(s - f.norm() * f.norm()) < 1e-12 * s);
  }
  SUBCASE("3D") {
    DensityOnSphere f = mixed_density(3, 3);
    DirectionGrid dirs = sphere_rule(3, 3);
    VectorXcd v = f.node_values(dirs);
    double s = 0;
    for (int q = 0; q < dirs.size(); ++q) s += dirs.w[std::size_t(q)] * std::norm(v[q]);
    CHECK(std::abs(s - f.norm() * f.norm()) < 1e-12 * s);
  }
}

TEST_CASE("under-resolved quadrature is refused") {
  Grid g = Grid::cube(2, 1.0, 16);
  DensityOnSphere f = mixed_density(2, 4);
  DirectionGrid dirs = sphere_rule(2, 3);
  CHECK_THROWS_AS(herglotz(f, 1.0, g, dirs), PreconditionError);
  SampledField V(g, 1, FieldRole::Potential);
  CHECK_THROWS_AS(averaged_solution(V, nullptr, f, 1.0, dirs), PreconditionError);
}

TEST_CASE("averaged solutions reduce to herglotz waves for zero potential") {
  double E = 1.2;
  Grid g = Grid::cube(2, 1.2, 24);
  SampledField V(g, 1, FieldRole::Potential);
  DensityOnSphere f = mixed_density(2, 2);
  DirectionGrid dirs = sphere_rule(2, 8);
  SampledField plus = averaged_solution(V, nullptr, f, E, dirs);
  SampledField zero = herglotz(f, E, g, dirs);
  double worst = 0;
  for (std::int64_t i = 0; i < g.npts(); ++i)
    worst = std::max(worst, std::abs(plus.at(0, i) - zero.at(0, i)));
  CHECK(worst < 1e-12 * max_abs(zero));
}

TEST_CASE("averaged solution is linear in the density") {
  double E = 1.0;
  Grid g = Grid::cube(2, 2.1, 48);
  SampledField V = sample_potential(well_spec(2, -0.5, 1.0), g);
  DirectionGrid dirs = sphere_rule(2, 4);
  DensityOnSphere f1 = mixed_density(2, 2), f2 = unit_density(2, 2, 1);
  cplx al(0.7, -0.2), be(-0.4, 1.1);
  DensityOnSphere fc = f1;
  fc.coef = al * f1.coef + be * f2.coef;

  SampledField u1 = averaged_solution(V, nullptr, f1, E, dirs);
  SampledField u2 = averaged_solution(V, nullptr, f2, E, dirs);
  SampledField uc = averaged_solution(V, nullptr, fc, E, dirs);
  double worst = 0, scale = max_abs(uc);
  for (std::int64_t i = 0; i < g.npts(); ++i)
    worst = std::max(worst, std::abs(uc.at(0, i) - (al * u1.at(0, i) + be * u2.at(0, i))));
  CHECK(worst < 1e-12 * scale);
}

TEST_CASE("a density concentrated at one direction mimics that single solve") {
  double E = 1.0;
  Grid g = Grid::cube(2, 2.1, 64);
  SampledField V = sample_potential(well_spec(2, -0.4, 0.8), g);
  Pt w0{1, 0}, wperp{0, 1};

  // reproducing kernel of degree 8 concentrated at w0
  int L = 8;
  HarmonicBasis basis{2, L};
  DensityOnSphere f;
  f.dim = 2;
  f.L = L;
  f.coef.resize(basis.size());
  for (int idx = 0; idx < basis.size(); ++idx) f.coef[idx] = std::conj(basis.eval(idx, w0));

  SampledField uf = averaged_solution(V, nullptr, f, E, sphere_rule(2, 12));
  LippmannSchwinger ls(V, nullptr, E);
  SampledField u0 = ls.solve(plane_wave(2, E, w0), w0).phi;
  SampledField up = ls.solve(plane_wave(2, E, wperp), wperp).phi;

  double d0 = 0, dp = 0, n0 = 0;
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    d0 += std::norm(uf.at(0, i) - u0.at(0, i));
    dp += std::norm(uf.at(0, i) - up.at(0, i));
    n0 += std::norm(u0.at(0, i));
  }
  d0 = std::sqrt(d0 / n0);
  dp = std::sqrt(dp / n0);
  CHECK(d0 < 0.5);
  CHECK(3 * d0 < dp);
}

TEST_CASE("two routes to the scattering matrix agree") {
  SUBCASE("zero potential gives the identity") {
    Grid g = Grid::cube(2, 1.0, 16);
    SampledField V(g, 1, FieldRole::Potential);
    ScatteringMatrix S = smatrix_via_representation(V, nullptr, 1.3, 3);
    CHECK((S.S - MatrixXcd::Identity(7, 7)).norm() == 0.0);
  }
  SUBCASE("radial well, against the far-field path and the oracle") {
    double E = 1.0;
    int L = 4;
    Grid g = Grid::cube(2, 2.1, 96);
    PotentialSpec spec = well_spec(2, -0.5, 1.0);
    SampledField V = sample_potential(spec, g);

    ScatteringMatrix srep = smatrix_via_representation(V, nullptr, E, L);
    ScatteringMatrix sfar = smatrix_from_farfield(far_field(V, nullptr, E, sphere_rule(2, 8)), L);
    CHECK((srep.S - sfar.S).cwiseAbs().maxCoeff() < 1e-3);

    ScatteringMatrix spw = partialwave_oracle(spec, E, 20).smatrix(L);
    CHECK((srep.S - spw.S).cwiseAbs().maxCoeff() < 5e-3);

    CHECK(srep.unitarity_defect() <= 2 * sfar.unitarity_defect() + 1e-12);
  }
}

TEST_CASE("interior target") {
  double E = 1.2;
  Ball K{{0, 0}, 0.5};
  SUBCASE("free case reproduces the source field") {
    Grid g = Grid::cube(2, 1.5, 40);
    SampledField V(g, 1, FieldRole::Potential);
    Pt y{0.9, 0.1};
    SampledField u = interior_target(V, nullptr, K, y, E);
    double worst = 0;
    for (std::int64_t i = 0; i < g.npts(); i += 3) {
      Pt x = g.point_of_index(i);
      cplx expect = helmholtz_green(2, E, norm(x - y));
      worst = std::max(worst, std::abs(u.at(0, i) - expect) / std::abs(expect));
    }
    CHECK(worst < 1e-13);
  }
  SUBCASE("smooth potential: the field still solves the equation") {
    Grid g = Grid::cube(2, 2.0, 64);
    PotentialSpec spec = gaussian_spec(2, 0.5, 0.12);
    SampledField V = sample_potential(spec, g);
    Pt y{1.2, 0.3};
    LippmannSchwinger ls(V, nullptr, E);
    auto inc = green_pole(2, E, y);
    auto sol = ls.solve(inc);
    CHECK(sol.residual <= 1e-8);
    CHECK(ls.equation_residual(sol, inc) < 1e-6);
  }
  SUBCASE("refusals") {
    Grid g = Grid::cube(2, 1.5, 24);
    SampledField V(g, 1, FieldRole::Potential);
    CHECK_THROWS_AS(interior_target(V, nullptr, K, {0.2, 0.1}, E), PreconditionError);
    CHECK_THROWS_AS(interior_target(V, nullptr, K, {1.6, 0.0}, E), PreconditionError);
  }
}

TEST_CASE("completeness of the averaged family") {
  SUBCASE("free case: point-source targets are captured, held-out degree is not") {
    double E = 1.69;  // k = 1.3
    Grid g = Grid::cube(2, 1.5, 96);
    SampledField V(g, 1, FieldRole::Potential);
    Ball K{{0, 0}, 0.8};
    auto targets = default_completeness_targets(V, nullptr, K, E, 5);
    REQUIRE(targets.size() == 4);
    CHECK(targets[3].name == "held-out averaged");

    std::vector<int> degrees{0, 1, 2, 3, 4, 5, 6, 7, 8};
    CompletenessReport rep = completeness_residual(V, nullptr, K, E, targets, degrees);

    // nested spans: residuals never increase with the degree
    for (Eigen::Index jt = 0; jt < rep.residual.cols(); ++jt)
      for (Eigen::Index di = 1; di < rep.residual.rows(); ++di)
        CHECK(rep.residual(di, jt) <= rep.residual(di - 1, jt) + 1e-12);

    // point sources near the ball need the predicted degree to resolve
    int lstar = int(std::ceil(std::exp(1.0) * 1.3 * K.radius / 2)) + 5;
    REQUIRE(lstar <= degrees.back());
    for (int jt = 0; jt < 3; ++jt) {
      CHECK(rep.residual(lstar, jt) < 1e-2);
      CHECK(rep.residual(0, jt) > 0.3);
    }

    // the held-out density has pure degree 5: orthogonality keeps it out of
    // lower-degree spans, then it drops in as soon as L reaches 5
    CHECK(rep.residual(4, 3) > 0.5);
    CHECK(rep.residual(5, 3) < 1e-6);

    CHECK(rep.gram_cond.size() == degrees.size());
    CHECK(rep.rank.size() == degrees.size());
    for (std::size_t di = 0; di < degrees.size(); ++di) {
      CHECK(rep.gram_cond[di] >= 1.0);
      CHECK(rep.rank[di] >= 1);
      for (Eigen::Index j = 0; j < rep.gram_eigs[di].size(); ++j)
        CHECK(rep.gram_eigs[di][j] >= 0.0);
    }
  }
  SUBCASE("a target inside the span projects to the solver floor") {
    double E = 1.0;
    Grid g = Grid::cube(2, 2.1, 48);
    SampledField V = sample_potential(well_spec(2, -0.5, 1.0), g);
    Ball K{{0, 0}, 0.95};
    std::vector<int> degrees{0, 2, 3};
    DirectionGrid rule = completeness_rule(2, 3);
    DensityOnSphere f = mixed_density(2, 2);
    TargetField tf{"in-span", averaged_solution(V, nullptr, f, E, rule)};
    CompletenessReport rep = completeness_residual(V, nullptr, K, E, {tf}, degrees);
    CHECK(rep.residual(0, 0) > 1e-2);
    CHECK(rep.residual(1, 0) < 1e-8);
    CHECK(rep.residual(2, 0) < 1e-8);
  }
  SUBCASE("free-case Gram matrix is Hermitian positive semidefinite") {
    double E = 1.1;
    Grid g = Grid::cube(2, 1.2, 48);
    Ball K{{0.1, -0.05}, 0.6};
    int L = 3;
    HarmonicBasis basis{2, L};
    DirectionGrid rule = completeness_rule(2, L);
    std::vector<double> wk = ball_weights(g, K.center, K.radius);

    MatrixXcd G = MatrixXcd::Zero(basis.size(), basis.size());
    std::vector<SampledField> fam;
    for (int b = 0; b < basis.size(); ++b)
      fam.push_back(herglotz(unit_density(2, L, b), E, g, rule));
    for (int b = 0; b < basis.size(); ++b)
      for (int c = 0; c < basis.size(); ++c) {
        cplx acc = 0;
        for (std::int64_t i = 0; i < g.npts(); ++i)
          acc += wk[std::size_t(i)] * fam[std::size_t(c)].at(0, i) * std::conj(fam[std::size_t(b)].at(0, i));
        G(b, c) = acc;
      }
    CHECK((G - G.adjoint()).norm() < 1e-12 * G.norm());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(G);
    CHECK(es.eigenvalues().minCoeff() > -1e-10 * es.eigenvalues().maxCoeff());
  }
  SUBCASE("refusals") {
    Grid g = Grid::cube(2, 1.5, 24);
    SampledField V(g, 1, FieldRole::Potential);
    SampledField u(g, 1, FieldRole::Wavefunction);
    std::vector<TargetField> ts{{"t", u}};
    CHECK_THROWS_AS(completeness_residual(V, nullptr, {{0, 0}, 1.6}, 1.0, ts, {0, 1}),
                    PreconditionError);
    CHECK_THROWS_AS(completeness_residual(V, nullptr, {{0, 0}, 0.5}, 1.0, {}, {0, 1}),
                    PreconditionError);
    CHECK_THROWS_AS(completeness_residual(V, nullptr, {{0, 0}, 0.5}, 1.0, ts, {2, 1}),
                    PreconditionError);
    SampledField other(Grid::cube(2, 1.5, 16), 1, FieldRole::Wavefunction);
    std::vector<TargetField> bad{{"t", other}};
    CHECK_THROWS_AS(completeness_residual(V, nullptr, {{0, 0}, 0.5}, 1.0, bad, {0, 1}),
                    PreconditionError);
  }
}

TEST_CASE("3D completeness smoke") {
  double E = 1.0;
  Grid g = Grid::cube(3, 1.2, 24);
  SampledField V(g, 1, FieldRole::Potential);
  Ball K{{0, 0, 0}, 0.6};
  Pt y{0.8, 0.1, -0.2};
  TargetField tf{"pole", interior_target(V, nullptr, K, y, E)};
  std::vector<int> degrees{0, 2, 4};
  CompletenessReport rep = completeness_residual(V, nullptr, K, E, {tf}, degrees);
  CHECK(rep.residual(2, 0) < rep.residual(0, 0));
  CHECK(rep.residual(2, 0) < 0.3);
  for (Eigen::Index di = 1; di < rep.residual.rows(); ++di)
    CHECK(rep.residual(di, 0) <= rep.residual(di - 1, 0) + 1e-12);
}
