#include "scatlab/gmres.hpp"

#include <algorithm>
#include <cmath>

#include "scatlab/types.hpp"

namespace scatlab {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

GmresReport gmres(const std::function<VectorXcd(const VectorXcd&)>& apply, const VectorXcd& b,
                  VectorXcd& x, const GmresOptions& opt) {
  GmresReport rep;
  const double bnorm = b.norm();
  if (x.size() != b.size()) x = VectorXcd::Zero(b.size());
  if (bnorm == 0) {
    x.setZero();
    rep.converged = true;
    rep.residual = 0;
    return rep;
  }

  const int m = opt.restart;
  MatrixXcd V(b.size(), m + 1);
  MatrixXcd H = MatrixXcd::Zero(m + 1, m);
  VectorXcd g(m + 1), cs(m), sn(m);
  double rmin = 1e300, rmax = 0;

  while (rep.iterations < opt.maxiter) {
    VectorXcd r = b - apply(x);
    double beta = r.norm();
    rep.residual = beta / bnorm;
    if (rep.residual <= opt.tol) {
      rep.converged = true;
      break;
    }
    V.col(0) = r / beta;
    g.setZero();
    g(0) = beta;

    int j = 0;
    for (; j < m && rep.iterations < opt.maxiter; ++j, ++rep.iterations) {
      VectorXcd w = apply(V.col(j));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (std::abs(H(j + 1, j)) > 0) V.col(j + 1) = w / H(j + 1, j);

      for (int i = 0; i < j; ++i) {
        cplx t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -std::conj(sn(i)) * H(i, j) + std::conj(cs(i)) * H(i + 1, j);
        H(i, j) = t;
      }
      double denom = std::sqrt(std::norm(H(j, j)) + std::norm(H(j + 1, j)));
      if (denom == 0) {
        cs(j) = 1;
        sn(j) = 0;
      } else {
        cs(j) = std::conj(H(j, j)) / denom;
        sn(j) = std::conj(H(j + 1, j)) / denom;
      }
      H(j, j) = cs(j) * H(j, j) + sn(j) * H(j + 1, j);
      H(j + 1, j) = 0;
      g(j + 1) = -std::conj(sn(j)) * g(j);
      g(j) = cs(j) * g(j);

      rmin = std::min(rmin, std::abs(H(j, j)));
      rmax = std::max(rmax, std::abs(H(j, j)));
      rep.history.push_back(std::abs(g(j + 1)) / bnorm);
      if (rep.history.back() <= opt.tol * 0.5) {
        ++j;
        ++rep.iterations;
        break;
      }
    }

    if (j > 0) {
      VectorXcd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
      x += V.leftCols(j) * y;
    }
    if (j == 0) break;  // stagnated: exact solution or lucky breakdown handled above
  }

  VectorXcd r = b - apply(x);
  rep.residual = r.norm() / bnorm;
  rep.converged = rep.residual <= opt.tol;
  if (rmax > 0 && rmin < 1e300) rep.cond = rmax / std::max(rmin, 1e-300);
  return rep;
}

}  // namespace scatlab
