#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfl/solvers.hpp"

namespace dfl {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense tableau. Row 0..m-1 are constraints, row m is the objective row
// holding reduced costs; the last column is the right-hand side.
class Tableau {
 public:
  Tableau(const Matrix& a, const Vector& b, const SimplexOptions& opts)
      : m_(a.rows()), n_(a.cols()), opts_(opts) {
    t_ = RowMatrix::Zero(m_ + 1, n_ + m_ + 1);
    for (Index i = 0; i < m_; ++i) {
      const double sign = b(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * a.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign * b(i);
    }
    basis_.resize(static_cast<size_t>(m_));
    for (Index i = 0; i < m_; ++i) basis_[static_cast<size_t>(i)] = n_ + i;
    active_row_.assign(static_cast<size_t>(m_), true);
  }

  Index rhs() const { return n_ + m_; }
  std::int64_t iterations() const { return iterations_; }

  // Phase 1: minimize the sum of artificials. Returns false if infeasible.
  bool phase1() {
    t_.row(m_).setZero();
    for (Index j = n_; j < n_ + m_; ++j) t_(m_, j) = 1.0;
    for (Index i = 0; i < m_; ++i) t_.row(m_) -= t_.row(i);
    allowed_cols_ = n_ + m_;
    if (run() != Outcome::Optimal) throw std::logic_error("simplex phase 1 unbounded");
    double scale = 1.0;
    for (Index i = 0; i < m_; ++i) scale = std::max(scale, std::abs(t_(i, rhs())));
    if (-t_(m_, rhs()) > 1e-7 * scale) return false;
    drive_out_artificials();
    return true;
  }

  // Phase 2 on the original columns. Returns false if unbounded.
  bool phase2(const Vector& cost) {
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = cost.transpose();
    for (Index i = 0; i < m_; ++i) {
      if (!active_row_[static_cast<size_t>(i)]) continue;
      const Index j = basis_[static_cast<size_t>(i)];
      const double cj = t_(m_, j);
      if (cj != 0.0) t_.row(m_) -= cj * t_.row(i);
    }
    allowed_cols_ = n_;
    return run() == Outcome::Optimal;
  }

  Vector solution() const {
    Vector x = Vector::Zero(n_);
    for (Index i = 0; i < m_; ++i) {
      if (!active_row_[static_cast<size_t>(i)]) continue;
      const Index j = basis_[static_cast<size_t>(i)];
      if (j < n_) x(j) = std::max(0.0, t_(i, rhs()));
    }
    return x;
  }

 private:
  enum class Outcome { Optimal, Unbounded };

  Outcome run() {
    int degenerate_streak = 0;
    while (true) {
      if (iterations_ >= opts_.max_iterations) {
        throw std::runtime_error("simplex: iteration limit reached");
      }
      const bool use_bland = !opts_.dantzig || degenerate_streak > 50;
      const Index enter = choose_entering(use_bland);
      if (enter < 0) return Outcome::Optimal;
      const Index leave = choose_leaving(enter);
      if (leave < 0) return Outcome::Unbounded;
      degenerate_streak = t_(leave, rhs()) <= opts_.tol ? degenerate_streak + 1 : 0;
      pivot(leave, enter);
      ++iterations_;
    }
  }

  Index choose_entering(bool bland) const {
    Index best = -1;
    double best_val = -opts_.tol;
    for (Index j = 0; j < allowed_cols_; ++j) {
      const double rc = t_(m_, j);
      if (rc < best_val) {
        if (bland) return j;
        best = j;
        best_val = rc;
      }
    }
    return best;
  }

  // Minimum ratio; ties broken by the smallest basic variable index (Bland).
  Index choose_leaving(Index enter) const {
    Index leave = -1;
    double best_ratio = 0.0;
    for (Index i = 0; i < m_; ++i) {
      if (!active_row_[static_cast<size_t>(i)]) continue;
      const double aij = t_(i, enter);
      if (aij <= opts_.tol) continue;
      const double ratio = t_(i, rhs()) / aij;
      if (leave < 0 || ratio < best_ratio - opts_.tol ||
          (std::abs(ratio - best_ratio) <= opts_.tol &&
           basis_[static_cast<size_t>(i)] < basis_[static_cast<size_t>(leave)])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    return leave;
  }

  void pivot(Index r, Index c) {
    t_.row(r) /= t_(r, c);
    for (Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<size_t>(r)] = c;
  }

  void drive_out_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<size_t>(i)] < n_) continue;
      Index col = -1;
      for (Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > opts_.tol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        // Redundant constraint row.
        active_row_[static_cast<size_t>(i)] = false;
      }
    }
  }

  Index m_, n_;
  SimplexOptions opts_;
  RowMatrix t_;
  std::vector<Index> basis_;
  std::vector<bool> active_row_;
  Index allowed_cols_ = 0;
  std::int64_t iterations_ = 0;
};

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

SolveResult simplex_solve(const Matrix& a, const Vector& b, const Vector& cost, const SimplexOptions& opts) {
  if (a.rows() != b.size() || a.cols() != cost.size()) {
    throw std::invalid_argument("simplex_solve: dimension mismatch");
  }
  if (!cost.allFinite()) throw std::invalid_argument("simplex_solve: non-finite cost");

  SolveResult res;
  Tableau tab(a, b, opts);
  if (!tab.phase1()) {
    res.status = SolveStatus::Infeasible;
    res.solution = Vector::Zero(a.cols());
    res.iterations = tab.iterations();
    return res;
  }
  if (!tab.phase2(cost)) {
    res.status = SolveStatus::Unbounded;
    res.solution = tab.solution();
    res.iterations = tab.iterations();
    return res;
  }
  res.solution = tab.solution();
  res.objective = cost.dot(res.solution);
  res.iterations = tab.iterations();
  return res;
}

SolveResult simplex_solve(const StandardFormLP& lp, const Vector& cost, const SimplexOptions& opts) {
  return simplex_solve(lp.a, lp.b, cost, opts);
}

}  // namespace dfl
