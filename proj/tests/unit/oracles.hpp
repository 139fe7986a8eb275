#pragma once

// Independent reference implementations used only by the tests: brute-force
// enumeration, basis enumeration, bisection and finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "dfl/linalg.hpp"
#include "dfl/rng.hpp"

namespace oracle {

using dfl::Index;
using dfl::Matrix;
using dfl::Vector;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Best {
  double value = kInf;
  Vector x;
  bool found = false;
};

/// min c^T x over basic feasible solutions of {A x = b, x >= 0}, by trying
/// every subset of rank(A) columns. Small n only.
inline Best enumerate_vertices(const Matrix& a, const Vector& b, const Vector& c) {
  const Index n = a.cols();
  Eigen::FullPivLU<Matrix> lu(a);
  const Index r = lu.rank();
  Best best;
  std::vector<bool> pick(static_cast<size_t>(n), false);
  std::fill(pick.begin(), pick.begin() + r, true);
  do {
    Matrix sub(a.rows(), r);
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j)
      if (pick[static_cast<size_t>(j)]) cols.push_back(j);
    for (Index k = 0; k < r; ++k) sub.col(k) = a.col(cols[static_cast<size_t>(k)]);
    Eigen::ColPivHouseholderQR<Matrix> qr(sub);
    if (qr.rank() < r) continue;
    const Vector xb = qr.solve(b);
    if ((sub * xb - b).lpNorm<Eigen::Infinity>() > 1e-9) continue;
    if ((xb.array() < -1e-9).any()) continue;
    Vector x = Vector::Zero(n);
    for (Index k = 0; k < r; ++k) x(cols[static_cast<size_t>(k)]) = std::max(0.0, xb(k));
    const double v = c.dot(x);
    if (v < best.value - 1e-12) {
      best.value = v;
      best.x = x;
      best.found = true;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

/// Maximum of values^T x over 0/1 vectors meeting every capacity.
inline Best knapsack_brute_force(const Matrix& weights, const Vector& caps, const Vector& values) {
  const Index n = weights.cols();
  Best best;
  best.value = -kInf;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = (mask >> i) & 1U ? 1.0 : 0.0;
    if (((weights * x - caps).array() > 1e-9).any()) continue;
    const double v = values.dot(x);
    if (v > best.value + 1e-12) {
      best.value = v;
      best.x = x;
      best.found = true;
    }
  }
  return best;
}

/// argmax y^T w - (rho/2)||w||^2 on {w >= 0, sum w <= 1} by bisection on the
/// budget multiplier.
inline Vector top1_bisection(const Vector& y, double rho) {
  auto w_of = [&](double lam) { return ((y.array() - lam) / rho).max(0.0).matrix().eval(); };
  if (w_of(0.0).sum() <= 1.0) return w_of(0.0);
  double lo = 0.0, hi = y.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (w_of(mid).sum() > 1.0 ? lo : hi) = mid;
  }
  return w_of(0.5 * (lo + hi));
}

/// Central differences of f at x along every coordinate.
inline Vector central_diff(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double rel_err(const Vector& a, const Vector& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

inline Vector random_vector(dfl::CounterRng& rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

inline Matrix random_matrix(dfl::CounterRng& rng, Index r, Index c, double lo, double hi) {
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

}  // namespace oracle
