#include "ccvo/geometry.hpp"

#include <cmath>
#include <sstream>

namespace ccvo {

namespace {

Vec2 rotate(const Vec2& v, double cos_a, double sin_a) {
  // [ cos  -sin; sin  cos ] for positive (counterclockwise) angles.
  return Vec2(cos_a * v.x() - sin_a * v.y(), sin_a * v.x() + cos_a * v.y());
}

// Solves [T1 T2] * (a, b) = v with the closed-form 2x2 inverse.
std::pair<double, double> tangent_coefficients(const CollisionCone& cone, const Vec2& v) {
  const double det = cross2(cone.tangent_1, cone.tangent_2);
  const double guard = 1e-12 * cone.tangent_1.norm() * cone.tangent_2.norm();
  if (std::abs(det) <= guard) {
    throw DegenerateConeError("tangent directions are numerically parallel");
  }
  const double a = cross2(v, cone.tangent_2) / det;
  const double b = cross2(cone.tangent_1, v) / det;
  return {a, b};
}

}  // namespace

CollisionCone build_collision_cone(const Disk& host, const Disk& other) {
  const Vec2 axis = other.center - host.center;
  const double dist = axis.norm();
  const double r = host.radius + other.radius;
  if (dist <= r) {
    std::ostringstream msg;
    msg << "disks overlap or touch: |p_ij| = " << dist << " <= combined radius " << r;
    throw OverlapError(msg.str());
  }

  CollisionCone cone;
  cone.apex = host.center;
  cone.axis = axis;
  cone.combined_radius = r;
  const double sin_a = r / dist;
  const double cos_a = std::sqrt(1.0 - sin_a * sin_a);
  cone.half_angle = std::asin(sin_a);
  cone.tangent_1 = rotate(axis, cos_a, -sin_a);
  cone.tangent_2 = rotate(axis, cos_a, sin_a);
  cone.normal_1 = rotate90_cw(cone.tangent_1);
  cone.normal_2 = rotate90_ccw(cone.tangent_2);
  return cone;
}

std::pair<Vec2, Vec2> outer_normals(const CollisionCone& cone) {
  return {cone.normal_1, cone.normal_2};
}

bool cone_contains(const CollisionCone& cone, const Vec2& v) {
  const double v2 = v.squaredNorm();
  if (v2 == 0.0) {
    return false;  // the degenerate ray is the apex alone
  }
  const Vec2& c = cone.axis;
  const double proj = v.dot(c);
  if (proj < 0.0) {
    return false;  // closest approach is behind the apex, which is outside
  }
  const double dist2 = c.squaredNorm() - proj * proj / v2;
  return dist2 <= cone.combined_radius * cone.combined_radius;
}

bool outside_by_normals(const CollisionCone& cone, const Vec2& v) {
  return v.dot(cone.normal_1) > 0.0 || v.dot(cone.normal_2) > 0.0;
}

bool vo_contains(const VelocityObstacle& vo, const Vec2& v_host) {
  return cone_contains(vo.cone, v_host - vo.translation);
}

VoCase classify_vj_case(const CollisionCone& cone, const Vec2& v_other) {
  const auto [a, b] = tangent_coefficients(cone, v_other);
  VoCase result{VoCaseTag::InsideInvertedCone, a, b};
  if (a <= 0.0 && b <= 0.0) {
    result.tag = VoCaseTag::InsideInvertedCone;
  } else if (a >= 0.0 && b >= 0.0) {
    result.tag = VoCaseTag::InsideCone;  // boundaries count as inside
  } else if (a < 0.0) {
    result.tag = VoCaseTag::LeftHalf;
  } else {
    result.tag = VoCaseTag::RightHalf;
  }
  return result;
}

bool feasible_by_cases(const CollisionCone& cone, const Vec2& v_other, const Vec2& v_host) {
  const VoCase vo_case = classify_vj_case(cone, v_other);
  const double a = vo_case.a;
  const double b = vo_case.b;

  switch (vo_case.tag) {
    case VoCaseTag::InsideCone:
    case VoCaseTag::InsideInvertedCone: {
      // v_host = c*T1 + d*T2; collision iff the relative velocity keeps both
      // tangent coefficients nonnegative.
      const auto [c, d] = tangent_coefficients(cone, v_host);
      return !(c - a >= 0.0 && d - b >= 0.0);
    }
    case VoCaseTag::LeftHalf: {
      // v_host = c*T1 + e*v_other with b > 0; the relative velocity is
      // c*T1 + (e-1)*v_other, in the cone iff e >= 1 and c + (e-1)*a >= 0.
      const double det = cross2(cone.tangent_1, v_other);
      if (std::abs(det) <= 1e-12 * cone.tangent_1.norm() * v_other.norm()) {
        throw DegenerateConeError("case decomposition basis is numerically singular");
      }
      const double c = cross2(v_host, v_other) / det;
      const double e = cross2(cone.tangent_1, v_host) / det;
      return !(e - 1.0 >= 0.0 && c + (e - 1.0) * a >= 0.0);
    }
    case VoCaseTag::RightHalf: {
      // v_host = d*T2 + e*v_other with a > 0; symmetric to LeftHalf.
      const double det = cross2(cone.tangent_2, v_other);
      if (std::abs(det) <= 1e-12 * cone.tangent_2.norm() * v_other.norm()) {
        throw DegenerateConeError("case decomposition basis is numerically singular");
      }
      const double d = cross2(v_host, v_other) / det;
      const double e = cross2(cone.tangent_2, v_host) / det;
      return !(e - 1.0 >= 0.0 && d + (e - 1.0) * b >= 0.0);
    }
  }
  return false;  // unreachable
}

}  // namespace ccvo
