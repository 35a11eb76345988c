#pragma once

#include <Eigen/Core>

namespace ccvo {

// All geometry is planar; fixed-size types throughout.
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

inline Vec2 rotate90_cw(const Vec2& v) { return Vec2(v.y(), -v.x()); }
inline Vec2 rotate90_ccw(const Vec2& v) { return Vec2(-v.y(), v.x()); }

inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace ccvo
