#include <doctest.h>

#include <Eigen/Dense>

#include "ccvo/errors.hpp"
#include "ccvo/qp.hpp"
#include "ccvo/rng.hpp"
#include "oracles.hpp"

namespace {

using ccvo::QpProblem;
using ccvo::QpStatus;

// Random feasible-by-construction instance: the inequality offsets are set
// below the value at a sampled interior point.
QpProblem random_instance(ccvo::RngStream& rng, int n, int n_eq, int m) {
  QpProblem p;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.gaussian_pair().x();
  p.H = a.transpose() * a + 0.1 * Eigen::MatrixXd::Identity(n, n);
  p.g.resize(n);
  for (int i = 0; i < n; ++i) p.g(i) = rng.gaussian_pair().x();

  Eigen::VectorXd interior(n);
  for (int i = 0; i < n; ++i) interior(i) = rng.gaussian_pair().x();

  p.A_eq.resize(n_eq, n);
  p.b_eq.resize(n_eq);
  for (int i = 0; i < n_eq; ++i) {
    for (int j = 0; j < n; ++j) p.A_eq(i, j) = rng.gaussian_pair().x();
    p.b_eq(i) = p.A_eq.row(i).dot(interior);
  }
  p.A_in.resize(m, n);
  p.b_in.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) p.A_in(i, j) = rng.gaussian_pair().x();
    p.b_in(i) = p.A_in.row(i).dot(interior) - std::abs(rng.gaussian_pair().x());
  }
  return p;
}

}  // namespace

TEST_CASE("unconstrained qp returns the newton point") {
  QpProblem p;
  p.H = Eigen::Matrix2d::Identity() * 2.0;
  p.g = Eigen::Vector2d(-2.0, -4.0);
  p.A_eq.resize(0, 2);
  p.b_eq.resize(0);
  p.A_in.resize(0, 2);
  p.b_in.resize(0);
  const auto res = ccvo::solve_qp(p);
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.x(0) == doctest::Approx(1.0));
  CHECK(res.x(1) == doctest::Approx(2.0));
  CHECK(res.kkt_residual < 1e-12);
}

TEST_CASE("active bound and multiplier") {
  QpProblem p;
  p.H = Eigen::MatrixXd::Identity(1, 1);
  p.g = Eigen::VectorXd::Constant(1, 1.0);
  p.A_eq.resize(0, 1);
  p.b_eq.resize(0);
  p.A_in = Eigen::MatrixXd::Identity(1, 1);
  p.b_in = Eigen::VectorXd::Zero(1);
  const auto res = ccvo::solve_qp(p);
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.x(0) == doctest::Approx(0.0));
  CHECK(res.in_multipliers(0) == doctest::Approx(1.0));
}

TEST_CASE("equality constrained qp") {
  QpProblem p;
  p.H = Eigen::MatrixXd::Identity(3, 3);
  p.g = Eigen::VectorXd::Zero(3);
  p.A_eq.resize(1, 3);
  p.A_eq << 1.0, 1.0, 1.0;
  p.b_eq = Eigen::VectorXd::Constant(1, 3.0);
  p.A_in.resize(0, 3);
  p.b_in.resize(0);
  const auto res = ccvo::solve_qp(p);
  REQUIRE(res.status == QpStatus::Optimal);
  for (int i = 0; i < 3; ++i) CHECK(res.x(i) == doctest::Approx(1.0));
}

TEST_CASE("infeasible inequalities are detected") {
  QpProblem p;
  p.H = Eigen::MatrixXd::Identity(1, 1);
  p.g = Eigen::VectorXd::Zero(1);
  p.A_eq.resize(0, 1);
  p.b_eq.resize(0);
  p.A_in.resize(2, 1);
  p.A_in << 1.0, -1.0;
  p.b_in.resize(2);
  p.b_in << 1.0, 1.0;  // x >= 1 and x <= -1
  const auto res = ccvo::solve_qp(p);
  CHECK(res.status == QpStatus::Infeasible);
}

TEST_CASE("random instances match the enumeration oracle") {
  ccvo::RngStream rng(ccvo::derive_stream_key(20240601, 0, 0, 7));
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 9);       // up to 10
    const int n_eq = static_cast<int>(rng.next_u64() % 3) % n;    // 0..2
    const int m = 1 + static_cast<int>(rng.next_u64() % 8);       // 1..8
    const QpProblem p = random_instance(rng, n, n_eq, m);
    const auto res = ccvo::solve_qp(p);
    REQUIRE(res.status == QpStatus::Optimal);
    const auto ref = ccvo::oracle::enumerate_qp(p);
    REQUIRE(ref.has_value());
    CHECK((res.x - *ref).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(res.kkt_residual < 1e-6);
    ++compared;
  }
  CHECK(compared == 200);
}

TEST_CASE("warm start determinism: identical input, identical output") {
  ccvo::RngStream rng(ccvo::derive_stream_key(7, 0, 0, 1));
  const QpProblem p = random_instance(rng, 6, 1, 5);
  const auto a = ccvo::solve_qp(p);
  const auto b = ccvo::solve_qp(p);
  REQUIRE(a.status == QpStatus::Optimal);
  CHECK((a.x - b.x).lpNorm<Eigen::Infinity>() == 0.0);
}
