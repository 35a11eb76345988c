#pragma once

// Test-side reference implementations, kept independent of the library
// code paths they are used to check.

#include <Eigen/Dense>
#include <optional>

#include "ccvo/qp.hpp"
#include "ccvo/types.hpp"

namespace ccvo::oracle {

/// Error function from its Maclaurin series in long double arithmetic
/// (120 terms), independent of std::erf. Accurate well below 1e-15 for
/// |x| <= 4.
double erf_series(double x);

/// Distance from `point` to the infinite line through `origin` with
/// direction `dir`.
double line_point_distance(const Vec2& origin, const Vec2& dir, const Vec2& point);

/// Brute-force reference for small dense QPs: enumerates every active
/// subset of the inequality constraints, solves the KKT system, and keeps
/// the feasible, dual-feasible candidate with the lowest objective.
/// Returns nullopt when no subset yields a feasible candidate.
std::optional<Eigen::VectorXd> enumerate_qp(const QpProblem& p);

}  // namespace ccvo::oracle
