#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ccvo {

/// Dense convex quadratic program
///   min 0.5 x'Hx + g'x   s.t.  A_eq x = b_eq,  A_in x >= b_in,
/// with H symmetric positive definite and A_eq of full row rank.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd A_eq;  // may have zero rows
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;  // may have zero rows
  Eigen::VectorXd b_in;
};

enum class QpStatus { Optimal, Infeasible, IterationLimit };

struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd eq_multipliers;  // lambda, free sign
  Eigen::VectorXd in_multipliers;  // mu >= 0, zero on inactive rows
  std::vector<int> active_set;     // inequality rows active at the solution
  int iterations = 0;
  double kkt_residual = 0.0;  // scaled max of stationarity/feasibility/complementarity
};

/// Dual active-set solve. Starts from the unconstrained minimizer and adds
/// the most violated constraint (ties broken toward the smallest row index)
/// until primal feasible, so no feasible starting point is needed.
/// Infeasible problems are detected when the dual becomes unbounded.
QpResult solve_qp(const QpProblem& problem);

}  // namespace ccvo
