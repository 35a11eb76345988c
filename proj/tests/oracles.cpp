#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace ccvo::oracle {

double erf_series(double x) {
  // erf(x) = 2/sqrt(pi) * sum_n (-1)^n x^(2n+1) / (n! (2n+1))
  const long double xl = static_cast<long double>(x);
  long double term = xl;  // n = 0 term before the 2/sqrt(pi) factor
  long double sum = 0.0L;
  for (int n = 0; n < 120; ++n) {
    sum += term / (2 * n + 1);
    term *= -xl * xl / static_cast<long double>(n + 1);
  }
  const long double two_over_sqrt_pi = 1.128379167095512573896158903121545172L;
  return static_cast<double>(two_over_sqrt_pi * sum);
}

double line_point_distance(const Vec2& origin, const Vec2& dir, const Vec2& point) {
  const Vec2 rel = point - origin;
  return std::abs(cross2(dir, rel)) / dir.norm();
}

std::optional<Eigen::VectorXd> enumerate_qp(const QpProblem& p) {
  const int n = static_cast<int>(p.H.rows());
  const int n_eq = static_cast<int>(p.A_eq.rows());
  const int m = static_cast<int>(p.A_in.rows());

  double best_obj = std::numeric_limits<double>::infinity();
  std::optional<Eigen::VectorXd> best;

  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) act.push_back(i);
    }
    const int na = n_eq + static_cast<int>(act.size());
    if (na > n) continue;

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + na, n + na);
    Eigen::VectorXd rhs(n + na);
    kkt.topLeftCorner(n, n) = p.H;
    rhs.head(n) = -p.g;
    for (int i = 0; i < n_eq; ++i) {
      kkt.block(n + i, 0, 1, n) = p.A_eq.row(i);
      kkt.block(0, n + i, n, 1) = -p.A_eq.row(i).transpose();
      rhs(n + i) = p.b_eq(i);
    }
    for (std::size_t j = 0; j < act.size(); ++j) {
      const int row = n + n_eq + static_cast<int>(j);
      kkt.block(row, 0, 1, n) = p.A_in.row(act[j]);
      kkt.block(0, row, n, 1) = -p.A_in.row(act[j]).transpose();
      rhs(row) = p.b_in(act[j]);
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd x = sol.head(n);

    bool ok = true;
    for (int i = 0; i < m && ok; ++i) {
      if (p.A_in.row(i).dot(x) - p.b_in(i) < -1e-9) ok = false;
    }
    for (std::size_t j = 0; j < act.size() && ok; ++j) {
      if (sol(n + n_eq + static_cast<int>(j)) < -1e-9) ok = false;
    }
    if (!ok) continue;

    const double obj = 0.5 * x.dot(p.H * x) + p.g.dot(x);
    if (obj < best_obj - 1e-12) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

}  // namespace ccvo::oracle
