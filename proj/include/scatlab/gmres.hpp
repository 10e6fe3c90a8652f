#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace scatlab {

struct GmresOptions {
  int restart = 60;
  int maxiter = 3000;
  double tol = 1e-8;  // relative residual target
};

struct GmresReport {
  bool converged = false;
  int iterations = 0;
  double residual = 1;  // true relative residual at exit
  double cond = 1;      // max/min |R_jj| over the triangularized Hessenberg
  std::vector<double> history;
};

// restarted GMRES with modified Gram-Schmidt Arnoldi and Givens updates;
// x carries the initial guess in and the solution out
GmresReport gmres(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply,
                  const Eigen::VectorXcd& b, Eigen::VectorXcd& x, const GmresOptions& opt);

}  // namespace scatlab
