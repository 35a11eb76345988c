#pragma once

#include <map>
#include <utility>

#include "ccvo/errors.hpp"
#include "ccvo/types.hpp"

namespace ccvo {

/// Planar velocity with Gaussian uncertainty. The covariance is symmetrized
/// and eigenvalue-clamped to the PSD cone on construction; eigenvalues below
/// -1e-12 are rejected.
struct GaussianVelocity {
  GaussianVelocity() : mean(Vec2::Zero()), covariance(Mat2::Zero()) {}
  GaussianVelocity(const Vec2& mean_in, const Mat2& covariance_in);

  Vec2 mean;
  Mat2 covariance;
};

/// Deterministic surrogate of one Gaussian half-plane chance constraint:
///   normal . v_mean - rhs >= margin
/// certifies that the underlying random inequality fails with probability
/// at most `threshold`.
struct LinearChanceConstraint {
  Vec2 normal = Vec2::Zero();
  double rhs = 0.0;
  double threshold = 0.0;  // allowed violation probability
  double margin = 0.0;     // deterministic back-off kappa

  double residual(const Vec2& v_mean) const { return normal.dot(v_mean) - rhs - margin; }
  bool satisfied(const Vec2& v_mean) const { return residual(v_mean) >= 0.0; }
};

/// Collision-probability bookkeeping across agent pairs. Each directed edge
/// (host, neighbor) carries the two per-normal thresholds; the composite
/// per-agent risk follows the product rule over neighbors.
class ProbabilityBudget {
 public:
  void set_edge(int host, int neighbor, double delta_1, double delta_2);
  const std::map<std::pair<int, int>, std::pair<double, double>>& per_edge_deltas() const {
    return per_edge_;
  }

 private:
  std::map<std::pair<int, int>, std::pair<double, double>> per_edge_;
};

/// Inverse of erf(x) = 2/sqrt(pi) * integral_0^x exp(-t^2) dt, accurate to
/// about 1e-15 absolute: a rational first guess polished by Newton steps.
/// Throws DomainError for |y| >= 1.
double inverse_erf(double y);

/// Deterministic back-off for a Gaussian half-plane constraint:
///   kappa = sqrt(2 * n' Sigma n) * erfinv(1 - 2*delta),
/// nonnegative for delta in (0, 0.5]. Throws DomainError outside that range.
double kappa(const Vec2& normal, const Mat2& covariance, double delta);

/// Builds the deterministic constraint certifying
///   Pr(normal . (v_host - v_other) <= 0) <= delta
/// for a Gaussian host velocity and a deterministic neighbor velocity.
LinearChanceConstraint deterministic_constraint(const Vec2& normal, const Vec2& v_other,
                                                const GaussianVelocity& host, double delta);

/// Symmetric split of a per-edge collision budget into the two per-normal
/// thresholds with delta_1 * delta_2 = delta_edge. Requires
/// delta_edge in (0, 0.25] so each factor stays in (0, 0.5].
std::pair<double, double> split_budget(double delta_edge);

/// Composite per-agent risk: delta_i = 1 - prod_j (1 - delta_ij1 * delta_ij2)
/// over every edge hosted by `agent`. Zero when the agent has no edges.
double composite_delta(const ProbabilityBudget& budget, int agent);

}  // namespace ccvo
