#pragma once

#include <utility>

#include "ccvo/errors.hpp"
#include "ccvo/types.hpp"

namespace ccvo {

/// A circular agent footprint.
struct Disk {
  Vec2 center;
  double radius = 0.0;
};

/// Collision cone of an ordered disk pair, expressed in relative-velocity
/// space with the apex at the origin of that space. The cone is the wedge
/// of relative velocities whose forward ray hits the Minkowski-sum disk of
/// combined radius centered at the relative position.
struct CollisionCone {
  Vec2 apex;             // host center (world frame)
  Vec2 axis;             // relative position, other - host
  double half_angle;     // sin(half_angle) * |axis| == combined_radius
  Vec2 tangent_1;        // axis rotated by -half_angle
  Vec2 tangent_2;        // axis rotated by +half_angle
  Vec2 normal_1;         // outward normal of the tangent_1 edge
  Vec2 normal_2;         // outward normal of the tangent_2 edge
  double combined_radius;
};

/// Collision cone translated by the other agent's velocity: the set of host
/// velocities that lead to collision if both agents hold course.
struct VelocityObstacle {
  CollisionCone cone;
  Vec2 translation;  // v_other
};

enum class VoCaseTag {
  InsideCone,          // both tangent coefficients positive
  InsideInvertedCone,  // both nonpositive
  LeftHalf,            // tangent_2 side only
  RightHalf,           // tangent_1 side only
};

/// Classification of the other agent's velocity against the cone edges,
/// with the tangent-basis coefficients v = a*T1 + b*T2.
struct VoCase {
  VoCaseTag tag;
  double a = 0.0;
  double b = 0.0;
};

/// Builds the collision cone for a disjoint disk pair.
/// Throws OverlapError when the disks intersect or touch.
CollisionCone build_collision_cone(const Disk& host, const Disk& other);

/// Outward edge normals (N1, N2): tangents rotated a quarter turn away from
/// the cone interior. Each has negative dot product with the axis.
std::pair<Vec2, Vec2> outer_normals(const CollisionCone& cone);

/// Exact ray-circle membership test: true iff the ray from the apex with
/// direction v intersects the combined-radius circle. Rays exactly tangent
/// to the circle count as inside.
bool cone_contains(const CollisionCone& cone, const Vec2& v);

/// Linear membership test via the outer normals: v is outside the cone iff
/// it has positive dot product with either normal. Agrees with
/// cone_contains away from the boundary.
bool outside_by_normals(const CollisionCone& cone, const Vec2& v);

/// Membership of a host velocity in the velocity obstacle.
bool vo_contains(const VelocityObstacle& vo, const Vec2& v_host);

/// Decomposes v_other over the tangent basis and assigns the quadrant case.
/// Boundary coefficients (a == 0 or b == 0 with the other positive) fold
/// into InsideCone, the conservative side.
VoCase classify_vj_case(const CollisionCone& cone, const Vec2& v_other);

/// Case-by-case feasibility of a host velocity given the other agent's
/// velocity, evaluated through the per-case decomposition. Equals
/// !vo_contains pointwise away from the boundary.
bool feasible_by_cases(const CollisionCone& cone, const Vec2& v_other, const Vec2& v_host);

}  // namespace ccvo
