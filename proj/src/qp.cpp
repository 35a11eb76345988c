#include "ccvo/qp.hpp"

#include <cmath>
#include <limits>

#include "ccvo/errors.hpp"

namespace ccvo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dual active-set state. The invariant maintained throughout:
//   J' H J = I   and   J' N_active = [R; 0]
// with N_active the matrix of active constraint normals as columns and R
// upper triangular, so step directions and multiplier sensitivities come
// from triangular solves plus Givens updates.
class DualActiveSet {
 public:
  explicit DualActiveSet(const QpProblem& p)
      : p_(p),
        n_(static_cast<int>(p.H.rows())),
        n_eq_(static_cast<int>(p.A_eq.rows())),
        m_(static_cast<int>(p.A_in.rows())),
        J_(n_, n_),
        R_(Eigen::MatrixXd::Zero(n_, n_)),
        u_(Eigen::VectorXd::Zero(n_)),
        d_(n_),
        z_(n_),
        r_(n_) {}

  QpResult solve() {
    QpResult res;
    if (p_.g.size() != n_ || p_.H.cols() != n_ ||
        (n_eq_ > 0 && p_.A_eq.cols() != n_) || p_.b_eq.size() != n_eq_ ||
        (m_ > 0 && p_.A_in.cols() != n_) || p_.b_in.size() != m_) {
      throw ConfigError("qp dimensions are inconsistent");
    }

    Eigen::LLT<Eigen::MatrixXd> llt(p_.H);
    if (llt.info() != Eigen::Success) {
      throw ConfigError("qp Hessian is not positive definite");
    }
    J_ = llt.matrixL().transpose().solve(Eigen::MatrixXd::Identity(n_, n_));
    x_ = llt.solve(-p_.g);

    if (!add_equalities()) {
      res.status = QpStatus::Infeasible;
      finalize(res);
      return res;
    }

    const int iter_limit = 20 * (n_ + m_) + 100;
    int iters = 0;
    while (true) {
      if (++iters > iter_limit) {
        res.status = QpStatus::IterationLimit;
        break;
      }
      const int ip = most_violated();
      if (ip < 0) {
        res.status = QpStatus::Optimal;
        break;
      }
      if (!add_inequality(ip, iters, iter_limit)) {
        res.status = iters > iter_limit ? QpStatus::IterationLimit : QpStatus::Infeasible;
        break;
      }
    }
    res.iterations = iters;
    finalize(res);
    return res;
  }

 private:
  bool is_active(int row) const {
    for (int k = n_eq_; k < q_; ++k) {
      if (active_[static_cast<std::size_t>(k)] == row) return true;
    }
    return false;
  }

  // Adds every equality constraint; returns false on inconsistency.
  bool add_equalities() {
    for (int i = 0; i < n_eq_; ++i) {
      const Eigen::VectorXd np = p_.A_eq.row(i).transpose();
      compute_step(np);
      const double slack = np.dot(x_) - p_.b_eq(i);
      const double z_dot = z_.dot(np);
      if (z_dot > zero_tol(np)) {
        const double t = -slack / z_dot;
        x_ += t * z_;
        u_.head(q_) -= t * r_.head(q_);
        u_(q_) = t;
      } else {
        if (std::abs(slack) > 1e-8 * (1.0 + std::abs(p_.b_eq(i)))) {
          return false;  // dependent and inconsistent
        }
        throw ConfigError("qp equality constraints are linearly dependent");
      }
      push_active(i - n_eq_);  // negative ids mark equalities
    }
    return true;
  }

  // Most violated inactive inequality, smallest index on ties; -1 when
  // primal feasible.
  int most_violated() {
    int ip = -1;
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (is_active(i)) continue;
      const double s = p_.A_in.row(i).dot(x_) - p_.b_in(i);
      const double tol = 1e-11 * (1.0 + std::abs(p_.b_in(i)));
      if (s < -tol && s < worst) {
        worst = s;
        ip = i;
      }
    }
    return ip;
  }

  // Runs primal/dual steps until constraint `ip` becomes active (true) or
  // the dual is unbounded (false, infeasible problem).
  bool add_inequality(int ip, int& iters, int iter_limit) {
    const Eigen::VectorXd np = p_.A_in.row(ip).transpose();
    double u_plus = 0.0;
    while (true) {
      if (++iters > iter_limit) return false;
      compute_step(np);
      double slack = np.dot(x_) - p_.b_in(ip);

      // Dual step length: first active inequality multiplier to hit zero.
      double t1 = kInf;
      int l1 = -1;
      for (int k = n_eq_; k < q_; ++k) {
        if (r_(k) > 0.0) {
          const double cand = u_(k) / r_(k);
          if (cand < t1) {
            t1 = cand;
            l1 = k;
          }
        }
      }
      // Primal step length to reach the constraint plane.
      const double z_dot = z_.dot(np);
      const double t2 = z_dot > zero_tol(np) ? -slack / z_dot : kInf;

      const double t = std::min(t1, t2);
      if (t >= kInf) return false;  // dual unbounded: no feasible point

      if (t2 >= kInf) {
        // Step in the dual only, then drop the blocking constraint.
        u_.head(q_) -= t * r_.head(q_);
        u_plus += t;
        drop_active(l1);
        continue;
      }

      x_ += t * z_;
      u_.head(q_) -= t * r_.head(q_);
      u_plus += t;

      if (t == t2) {
        u_(q_) = u_plus;
        push_active(ip);
        return true;
      }
      drop_active(l1);  // partial step; re-examine the same constraint
    }
  }

  // d = J'np, z = J2 d2, r = R^-1 d1 for the current active set.
  void compute_step(const Eigen::VectorXd& np) {
    d_.noalias() = J_.transpose() * np;
    z_ = J_.rightCols(n_ - q_) * d_.tail(n_ - q_);
    if (q_ > 0) {
      r_.head(q_) = R_.topLeftCorner(q_, q_)
                        .triangularView<Eigen::Upper>()
                        .solve(d_.head(q_));
    }
  }

  double zero_tol(const Eigen::VectorXd& np) const {
    // z'np equals |d2|^2; treat it as zero relative to |d|^2.
    (void)np;
    return 1e-22 * d_.squaredNorm() + 1e-300;
  }

  void push_active(int id) {
    // Rotate d to upper-triangular form; apply the same plane rotations to J.
    for (int k = n_ - 1; k > q_; --k) {
      rotate_out(d_(k - 1), d_(k), k - 1);
    }
    R_.col(q_).head(q_ + 1) = d_.head(q_ + 1);
    active_.push_back(id);
    ++q_;
  }

  void drop_active(int pos) {
    active_.erase(active_.begin() + pos);
    for (int j = pos; j < q_ - 1; ++j) {
      R_.col(j) = R_.col(j + 1);
      u_(j) = u_(j + 1);
    }
    u_(q_ - 1) = 0.0;
    --q_;
    // Re-triangularize the shifted columns.
    for (int k = pos; k < q_; ++k) {
      double a = R_(k, k);
      double b = R_(k + 1, k);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      for (int j = k; j < q_; ++j) {
        const double rk = R_(k, j);
        const double rk1 = R_(k + 1, j);
        R_(k, j) = c * rk + s * rk1;
        R_(k + 1, j) = -s * rk + c * rk1;
      }
      givens_on_J(k, c, s);
    }
  }

  // Plane rotation on coordinates (k, k+1) of the J' frame that zeroes the
  // second component of (a, b), stored back into d_.
  void rotate_out(double a, double b, int k) {
    if (b == 0.0) return;
    const double h = std::hypot(a, b);
    const double c = a / h;
    const double s = b / h;
    d_(k) = h;
    d_(k + 1) = 0.0;
    givens_on_J(k, c, s);
  }

  void givens_on_J(int k, double c, double s) {
    for (int row = 0; row < n_; ++row) {
      const double jk = J_(row, k);
      const double jk1 = J_(row, k + 1);
      J_(row, k) = c * jk + s * jk1;
      J_(row, k + 1) = -s * jk + c * jk1;
    }
  }

  void finalize(QpResult& res) {
    res.x = x_;
    res.objective = 0.5 * x_.dot(p_.H * x_) + p_.g.dot(x_);
    res.eq_multipliers = Eigen::VectorXd::Zero(n_eq_);
    res.in_multipliers = Eigen::VectorXd::Zero(m_);
    res.active_set.clear();
    for (int k = 0; k < q_; ++k) {
      const int id = active_[static_cast<std::size_t>(k)];
      if (id < 0) {
        res.eq_multipliers(id + n_eq_) = u_(k);
      } else {
        res.in_multipliers(id) = u_(k);
        res.active_set.push_back(id);
      }
    }

    // Scaled KKT residual of the returned point.
    Eigen::VectorXd stat = p_.H * x_ + p_.g;
    if (n_eq_ > 0) stat -= p_.A_eq.transpose() * res.eq_multipliers;
    if (m_ > 0) stat -= p_.A_in.transpose() * res.in_multipliers;
    double r = stat.lpNorm<Eigen::Infinity>() / (1.0 + p_.g.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < n_eq_; ++i) {
      r = std::max(r, std::abs(p_.A_eq.row(i).dot(x_) - p_.b_eq(i)) /
                          (1.0 + std::abs(p_.b_eq(i))));
    }
    for (int i = 0; i < m_; ++i) {
      const double s = p_.A_in.row(i).dot(x_) - p_.b_in(i);
      const double scale = 1.0 + std::abs(p_.b_in(i));
      r = std::max(r, std::max(0.0, -s) / scale);
      r = std::max(r, std::abs(res.in_multipliers(i) * s) / scale);
    }
    res.kkt_residual = r;
  }

  const QpProblem& p_;
  int n_;
  int n_eq_;
  int m_;
  int q_ = 0;  // active count, equalities first
  Eigen::MatrixXd J_;
  Eigen::MatrixXd R_;
  Eigen::VectorXd u_;
  Eigen::VectorXd d_;
  Eigen::VectorXd z_;
  Eigen::VectorXd r_;
  Eigen::VectorXd x_;
  std::vector<int> active_;
};

}  // namespace

QpResult solve_qp(const QpProblem& problem) {
  DualActiveSet solver(problem);
  return solver.solve();
}

}  // namespace ccvo
