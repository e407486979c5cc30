#pragma once

#include <Eigen/Dense>

namespace trpmbm {

struct LPSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd duals;  // one per constraint, <= 0
  double objective = 0.0;
  int pivots = 0;
};

/// Minimizes c'x subject to A x <= b, x >= 0, for b >= 0 (the all-slack basis is feasible).
/// Primal simplex on a tableau that keeps exact zeros, so sparse problems pivot cheaply;
/// Dantzig pricing, falling back to Bland's rule while pivots stay degenerate.
/// Throws NumericalError when the problem is unbounded or does not converge.
LPSolution solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

}  // namespace trpmbm
