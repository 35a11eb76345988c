#include "ccvo/dynamics.hpp"

#include <Eigen/Cholesky>

namespace ccvo {

AgentState step_dynamics(const AgentState& x, const ControlInput& u, double dt, double mass,
                         const Vec2& velocity_noise) {
  AgentState next;
  next.position = x.position + x.velocity * dt;
  next.velocity = x.velocity + (u.force / mass) * dt + velocity_noise;
  return next;
}

namespace {

Mat4 transition(double dt) {
  Mat4 f = Mat4::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

}  // namespace

NeighborEstimate kf_predict(const NeighborEstimate& est, double dt, const Mat4& process_cov) {
  NeighborEstimate out;
  out.mean.position = est.mean.position + est.mean.velocity * dt;
  out.mean.velocity = est.mean.velocity;
  const Mat4 f = transition(dt);
  out.covariance = f * est.covariance * f.transpose() + process_cov;
  return out;
}

NeighborEstimate kf_update(const NeighborEstimate& est, const AgentState& observed,
                           const Mat4& meas_cov) {
  if (meas_cov.isZero(0.0)) {
    // Exact measurement: the posterior collapses onto the observation.
    return NeighborEstimate{observed, Mat4::Zero()};
  }
  const Mat4 innovation_cov = est.covariance + meas_cov;
  const Eigen::LDLT<Mat4> ldlt(innovation_cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-300) {
    throw SingularInnovationError("innovation covariance is numerically singular");
  }
  const Mat4 gain = ldlt.solve(est.covariance).transpose();
  const Vec4 innovation = observed.as_vector() - est.mean.as_vector();

  NeighborEstimate out;
  out.mean = AgentState::from_vector(est.mean.as_vector() + gain * innovation);
  const Mat4 residual_form = Mat4::Identity() - gain;
  out.covariance =
      residual_form * est.covariance * residual_form.transpose() + gain * meas_cov * gain.transpose();
  return out;
}

std::vector<AgentState> predict_neighbor_horizon(const NeighborEstimate& est, int n_steps,
                                                 double dt) {
  std::vector<AgentState> out;
  out.reserve(static_cast<std::size_t>(n_steps));
  AgentState current = est.mean;
  for (int k = 0; k < n_steps; ++k) {
    current.position += current.velocity * dt;  // same accumulation as kf_predict
    out.push_back(current);
  }
  return out;
}

}  // namespace ccvo
