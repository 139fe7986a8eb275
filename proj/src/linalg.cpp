#include "dfl/linalg.hpp"

#include <stdexcept>
#include <string>

#include "dfl/log.hpp"

namespace dfl {

PseudoInverse pseudoinverse_ex(const Matrix& a) {
  PseudoInverse out;
  if (a.rows() == 0) {
    out.pinv = Matrix::Zero(a.cols(), 0);
    return out;
  }
  if (a.size() == 0 || (a.array() == 0.0).all()) {
    throw std::invalid_argument("degenerate constraint matrix");
  }
  if (!all_finite(a)) {
    throw std::invalid_argument("constraint matrix has non-finite entries");
  }

  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = kRankCutoff * s(0);

  Vector inv_s = Vector::Zero(s.size());
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      inv_s(i) = 1.0 / s(i);
      ++rank;
    }
  }
  out.pinv = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
  out.rank = rank;
  out.dropped_rows = a.rows() - rank;
  return out;
}

Matrix pseudoinverse(const Matrix& a) {
  auto r = pseudoinverse_ex(a);
  if (r.dropped_rows > 0) {
    log_warning("pseudoinverse: dropped " + std::to_string(r.dropped_rows) +
                " numerically dependent row(s)");
  }
  return std::move(r.pinv);
}

AffineProjector::AffineProjector(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != b_.size()) {
    throw std::invalid_argument("AffineProjector: A has " + std::to_string(a_.rows()) +
                                " rows but b has " + std::to_string(b_.size()) + " entries");
  }
  auto r = pseudoinverse_ex(a_);
  if (r.dropped_rows > 0) {
    log_warning("constraint matrix: dropped " + std::to_string(r.dropped_rows) +
                " numerically dependent row(s)");
  }
  pinv_ = std::move(r.pinv);
  rank_ = r.rank;
  dropped_rows_ = r.dropped_rows;
  const Index k = a_.cols();
  null_proj_ = Matrix::Identity(k, k) - pinv_ * a_;
  // Symmetrize away rounding so downstream code can rely on N == N^T.
  null_proj_ = 0.5 * (null_proj_ + null_proj_.transpose()).eval();
}

Vector project_affine(const AffineProjector& p, const Vector& w) {
  if (w.size() != p.dim()) {
    throw std::invalid_argument("project_affine: dimension mismatch (expected " +
                                std::to_string(p.dim()) + ", got " + std::to_string(w.size()) +
                                ")");
  }
  if (p.a().rows() == 0) return w;
  return w - p.pinv() * (p.a() * w - p.b());
}

Vector project_nonneg(const Vector& w) { return w.cwiseMax(0.0); }

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix(0, 0);
  const auto cols = static_cast<Index>(rows.front().size());
  Matrix m(static_cast<Index>(rows.size()), cols);
  for (Index i = 0; i < m.rows(); ++i) {
    const auto& r = rows[static_cast<size_t>(i)];
    if (static_cast<Index>(r.size()) != cols) {
      throw std::invalid_argument("matrix_from_rows: ragged rows");
    }
    for (Index j = 0; j < cols; ++j) m(i, j) = r[static_cast<size_t>(j)];
  }
  return m;
}

Vector vector_from(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace dfl
