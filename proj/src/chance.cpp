#include "ccvo/chance.hpp"

#include <cmath>
#include <sstream>

namespace ccvo {

GaussianVelocity::GaussianVelocity(const Vec2& mean_in, const Mat2& covariance_in)
    : mean(mean_in) {
  const Mat2 sym = 0.5 * (covariance_in + covariance_in.transpose());
  // Closed-form 2x2 eigendecomposition.
  const double tr = sym.trace();
  const double det = sym.determinant();
  const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
  const double lo = 0.5 * tr - disc;
  const double hi = 0.5 * tr + disc;
  if (lo < -1e-12) {
    std::ostringstream msg;
    msg << "covariance has eigenvalue " << lo << " below the PSD tolerance";
    throw DomainError(msg.str());
  }
  covariance = sym;
  if (lo < 0.0) {
    // Clamp the slightly negative eigenvalue to zero.
    Vec2 dir;
    if (std::abs(sym(0, 1)) > 0.0) {
      dir = Vec2(lo - sym(1, 1), sym(0, 1)).normalized();
    } else {
      dir = sym(0, 0) <= sym(1, 1) ? Vec2(1, 0) : Vec2(0, 1);
    }
    covariance = sym - lo * dir * dir.transpose();
    (void)hi;
  }
}

void ProbabilityBudget::set_edge(int host, int neighbor, double delta_1, double delta_2) {
  if (!(delta_1 > 0.0 && delta_1 < 1.0 && delta_2 > 0.0 && delta_2 < 1.0)) {
    throw DomainError("per-edge thresholds must lie in (0, 1)");
  }
  per_edge_[{host, neighbor}] = {delta_1, delta_2};
}

double inverse_erf(double y) {
  if (!(std::abs(y) < 1.0)) {
    std::ostringstream msg;
    msg << "inverse_erf argument " << y << " outside (-1, 1)";
    throw DomainError(msg.str());
  }
  if (y == 0.0) {
    return 0.0;
  }

  // Rational first guess (max relative error a few 1e-8 over the range),
  // then Newton on erf(x) - y with the analytic derivative 2/sqrt(pi)
  // * exp(-x^2). Two corrections reach double precision; a third guards
  // the extreme tail.
  const double ay = std::abs(y);
  double x;
  if (ay <= 0.75) {
    static const double p[] = {-13.0959967422, 26.785225760, -9.289057635};
    static const double q[] = {-12.0749426297, 30.960614529, -17.149977991, 1.0};
    const double t = y * y - 0.75 * 0.75;
    x = y * (p[0] + t * (p[1] + t * p[2])) / (q[0] + t * (q[1] + t * (q[2] + t * q[3])));
  } else if (ay <= 0.9375) {
    static const double p[] = {-0.12402565221, 1.0688059574, -1.9594556078, 0.4230581357};
    static const double q[] = {-0.08827697997, 0.8900743359, -2.1757031196, 1.0};
    const double t = y * y - 0.9375 * 0.9375;
    x = y * (p[0] + t * (p[1] + t * (p[2] + t * p[3]))) /
        (q[0] + t * (q[1] + t * (q[2] + t * q[3])));
  } else {
    static const double p[] = {0.1550470003116,  1.382719649631, 0.690969348887,
                               -1.128081391617, 0.680544246825, -0.16444156791};
    static const double q[] = {0.155024849822, 1.385228141995, 1.0};
    const double t = 1.0 / std::sqrt(-std::log(1.0 - ay));
    x = std::copysign((p[0] / t + p[1] + t * (p[2] + t * (p[3] + t * (p[4] + t * p[5])))) /
                          (q[0] + t * (q[1] + t * q[2])),
                      y);
  }

  const double two_over_sqrt_pi = 1.1283791670955126;
  for (int iter = 0; iter < 3; ++iter) {
    const double err = std::erf(x) - y;
    const double deriv = two_over_sqrt_pi * std::exp(-x * x);
    if (deriv == 0.0) {
      break;
    }
    const double step = err / deriv;
    x -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) {
      break;
    }
  }
  return x;
}

double kappa(const Vec2& normal, const Mat2& covariance, double delta) {
  if (!(delta > 0.0 && delta <= 0.5)) {
    std::ostringstream msg;
    msg << "probability threshold " << delta << " outside (0, 0.5]";
    throw DomainError(msg.str());
  }
  const double quad = std::max(normal.dot(covariance * normal), 0.0);
  return std::sqrt(2.0 * quad) * inverse_erf(1.0 - 2.0 * delta);
}

LinearChanceConstraint deterministic_constraint(const Vec2& normal, const Vec2& v_other,
                                                const GaussianVelocity& host, double delta) {
  LinearChanceConstraint c;
  c.normal = normal;
  c.rhs = normal.dot(v_other);
  c.threshold = delta;
  c.margin = kappa(normal, host.covariance, delta);
  return c;
}

std::pair<double, double> split_budget(double delta_edge) {
  if (!(delta_edge > 0.0 && delta_edge <= 0.25)) {
    std::ostringstream msg;
    msg << "edge budget " << delta_edge << " outside (0, 0.25]";
    throw DomainError(msg.str());
  }
  const double half = std::sqrt(delta_edge);
  return {half, half};
}

double composite_delta(const ProbabilityBudget& budget, int agent) {
  double survive = 1.0;
  for (const auto& [edge, deltas] : budget.per_edge_deltas()) {
    if (edge.first == agent) {
      survive *= 1.0 - deltas.first * deltas.second;
    }
  }
  return 1.0 - survive;
}

}  // namespace ccvo
