#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace dfl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative singular-value cutoff used to decide numerical rank.
inline constexpr double kRankCutoff = 1e-10;

struct PseudoInverse {
  Matrix pinv;            // K x m
  Index rank = 0;
  Index dropped_rows = 0; // m - rank, rows that are linear combinations of others
};

/// Moore-Penrose pseudoinverse with a relative singular-value cutoff.
/// Throws std::invalid_argument("degenerate constraint matrix") when every
/// entry of A is zero. Rank deficiency is reported, not an error.
PseudoInverse pseudoinverse_ex(const Matrix& a);
Matrix pseudoinverse(const Matrix& a);

/// Orthogonal projection data for the affine set {w : A w = b}.
class AffineProjector {
 public:
  AffineProjector(Matrix a, Vector b);

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  const Matrix& pinv() const { return pinv_; }
  /// I - A^+ A, symmetric and idempotent.
  const Matrix& null_proj() const { return null_proj_; }
  Index dim() const { return a_.cols(); }
  Index rank() const { return rank_; }
  Index dropped_rows() const { return dropped_rows_; }

 private:
  Matrix a_;
  Vector b_;
  Matrix pinv_;
  Matrix null_proj_;
  Index rank_ = 0;
  Index dropped_rows_ = 0;
};

/// w - A^+ (A w - b). Euclidean-nearest point of the affine set.
Vector project_affine(const AffineProjector& p, const Vector& w);

/// Elementwise max(0, w).
Vector project_nonneg(const Vector& w);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

/// Row-major construction helper, mostly for tests and bindings.
Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows);
Vector vector_from(const std::vector<double>& v);
std::vector<double> to_std(const Vector& v);

}  // namespace dfl
