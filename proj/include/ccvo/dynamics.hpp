#pragma once

#include <vector>

#include "ccvo/errors.hpp"
#include "ccvo/types.hpp"

namespace ccvo {

/// Planar double-integrator state, stacked as [px, py, vx, vy].
struct AgentState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();

  Vec4 as_vector() const { return Vec4(position.x(), position.y(), velocity.x(), velocity.y()); }
  static AgentState from_vector(const Vec4& x) {
    return AgentState{Vec2(x(0), x(1)), Vec2(x(2), x(3))};
  }
};

struct ControlInput {
  Vec2 force = Vec2::Zero();
};

/// Diagonal state-noise model. The velocity block drives the process noise
/// injected into the simulated dynamics; the full matrix is the measurement
/// covariance of neighbor observations. `scale` multiplies everything and
/// zero disables noise entirely.
struct NoiseModel {
  Vec4 state_covariance_diag = Vec4(0.01, 0.01, 0.05, 0.05);
  double scale = 1.0;

  bool enabled() const { return scale > 0.0; }
  Mat4 state_covariance() const { return (scale * state_covariance_diag).asDiagonal(); }
  Mat2 velocity_covariance() const {
    return (scale * state_covariance_diag.tail<2>()).asDiagonal();
  }
  Mat4 measurement_covariance() const { return state_covariance(); }
};

/// Filtered belief over one neighbor's full state.
struct NeighborEstimate {
  AgentState mean;
  Mat4 covariance = Mat4::Zero();
};

/// One forward-Euler step of the double integrator:
///   p+ = p + v*dt,  v+ = v + (u/m)*dt + velocity_noise.
/// Pass a zero noise sample for the nominal (deterministic) step.
AgentState step_dynamics(const AgentState& x, const ControlInput& u, double dt, double mass,
                         const Vec2& velocity_noise = Vec2::Zero());

/// Constant-velocity Kalman prediction: mean drifts by v*dt, covariance
/// propagates as F P F' + Q.
NeighborEstimate kf_predict(const NeighborEstimate& est, double dt, const Mat4& process_cov);

/// Full-state Kalman measurement update (identity measurement matrix),
/// Joseph-form covariance. A zero measurement covariance snaps the
/// posterior onto the observation. Throws SingularInnovationError when the
/// innovation covariance cannot be inverted.
NeighborEstimate kf_update(const NeighborEstimate& est, const AgentState& observed,
                           const Mat4& meas_cov);

/// Constant-velocity extrapolation of the filter mean over the horizon.
/// Returns states at steps 1..n_steps; positions accumulate exactly like
/// chained kf_predict means.
std::vector<AgentState> predict_neighbor_horizon(const NeighborEstimate& est, int n_steps,
                                                 double dt);

}  // namespace ccvo
