#include "dfl/dys_layer.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dfl/problem.hpp"

namespace dfl {
namespace {

std::uint64_t next_layer_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

std::string to_string(DysMode m) {
  return m == DysMode::FixedIterations ? "fixed-iterations" : "to-convergence";
}

std::string to_string(VjpMode m) { return m == VjpMode::ActiveSet ? "active-set" : "jacobian-free"; }

DysMode dys_mode_from_string(const std::string& s) {
  if (s == "fixed-iterations") return DysMode::FixedIterations;
  if (s == "to-convergence") return DysMode::ToConvergence;
  throw std::invalid_argument("unknown DYS mode '" + s + "' (expected fixed-iterations or to-convergence)");
}

VjpMode vjp_mode_from_string(const std::string& s) {
  if (s == "active-set") return VjpMode::ActiveSet;
  if (s == "jacobian-free") return VjpMode::JacobianFree;
  throw std::invalid_argument("unknown VJP mode '" + s + "' (expected active-set or jacobian-free)");
}

void DysConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("DysConfig: rho must be positive, got " + describe());
  if (!(alpha > 0.0) || !(alpha * rho < 2.0)) {
    throw std::invalid_argument("DysConfig: alpha must satisfy 0 < alpha < 2/rho, got " + describe());
  }
  if (max_iters < 1) throw std::invalid_argument("DysConfig: max_iters must be >= 1, got " + describe());
  if (!(tol > 0.0)) throw std::invalid_argument("DysConfig: tol must be positive, got " + describe());
}

std::string DysConfig::describe() const {
  std::ostringstream os;
  os << "rho=" << rho << " alpha=" << alpha << " max_iters=" << max_iters << " tol=" << tol
     << " mode=" << to_string(mode);
  return os.str();
}

DysLayer::DysLayer(const StandardFormLP& lp, DysConfig cfg)
    : projector_(lp.a, lp.b), cfg_(cfg), num_original_(lp.num_original_vars), id_(next_layer_id()) {
  cfg_.validate();
  reg_ = Vector::Zero(lp.num_vars());
  reg_.head(num_original_).setOnes();
}

DysLayer::DysLayer(const Problem& problem, DysConfig cfg) : DysLayer(problem.relaxation(), cfg) {}

void DysLayer::set_config(DysConfig cfg) {
  cfg.validate();
  cfg_ = cfg;
  id_ = next_layer_id();
}

Vector DysLayer::embed(const Vector& original_cost) const {
  if (original_cost.size() != num_original_) {
    throw std::invalid_argument("DysLayer::embed: expected " + std::to_string(num_original_) + " entries, got " +
                                std::to_string(original_cost.size()));
  }
  Vector c = Vector::Zero(num_vars());
  c.head(num_original_) = original_cost;
  return c;
}

DysForwardRecord dys_forward(const DysLayer& layer, const Vector& cost, const Vector* warm_start) {
  const Index n = layer.num_vars();
  if (cost.size() != n) {
    throw std::invalid_argument("dys_forward: expected cost of length " + std::to_string(n) + ", got " +
                                std::to_string(cost.size()));
  }
  const DysConfig& cfg = layer.config();
  const AffineProjector& p = layer.projector();
  const Vector shrink = (2.0 - cfg.alpha * cfg.rho * layer.reg_weights().array()).matrix();
  const Vector step_cost = cfg.alpha * cost;

  Vector w = warm_start != nullptr && warm_start->size() == n ? *warm_start : project_affine(p, Vector::Zero(n));
  DysForwardRecord rec;
  rec.layer_id = layer.id();
  rec.residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Vector x = project_nonneg(w);
    const Vector z = project_affine(p, shrink.cwiseProduct(x) - w - step_cost);
    Vector next = w - x + z;
    rec.residual = (next - w).lpNorm<Eigen::Infinity>();
    w = std::move(next);
    rec.iters_used = it + 1;
    if (!std::isfinite(rec.residual)) {
      throw std::runtime_error("dys_forward: non-finite iterate at iteration " + std::to_string(it + 1) + " with " +
                               cfg.describe());
    }
    if (cfg.mode == DysMode::ToConvergence && rec.residual <= cfg.tol) {
      rec.converged = true;
      break;
    }
  }
  if (cfg.mode == DysMode::FixedIterations) rec.converged = rec.residual <= cfg.tol;
  rec.output = project_nonneg(w);
  rec.active_mask.resize(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) rec.active_mask[static_cast<size_t>(i)] = w(i) > 0.0;
  rec.final_iterate = std::move(w);
  return rec;
}

Vector dys_vjp(const DysLayer& layer, const DysForwardRecord& record, const Vector& upstream) {
  if (record.layer_id != layer.id()) {
    throw std::invalid_argument("dys_vjp: stale forward record (layer was rebuilt or reconfigured)");
  }
  const Index n = layer.num_vars();
  if (upstream.size() != n) {
    throw std::invalid_argument("dys_vjp: expected upstream of length " + std::to_string(n) + ", got " +
                                std::to_string(upstream.size()));
  }
  const DysConfig& cfg = layer.config();

  if (cfg.vjp == VjpMode::JacobianFree) {
    Vector masked = upstream;
    for (Index i = 0; i < n; ++i)
      if (!record.active_mask[static_cast<size_t>(i)]) masked(i) = 0.0;
    return -cfg.alpha * (layer.projector().null_proj() * masked);
  }

  std::vector<Index> support;
  for (Index i = 0; i < n; ++i)
    if (record.active_mask[static_cast<size_t>(i)]) support.push_back(i);
  Vector grad = Vector::Zero(n);
  const auto s = static_cast<Index>(support.size());
  if (s == 0 || upstream.isZero(0.0)) return grad;

  const Matrix& a = layer.projector().a();
  Matrix a_s(a.rows(), s);
  Vector h(s), u(s);
  for (Index j = 0; j < s; ++j) {
    const Index i = support[static_cast<size_t>(j)];
    a_s.col(j) = a.col(i);
    h(j) = cfg.rho * layer.reg_weights()(i);
    u(j) = upstream(i);
  }

  // Orthonormal basis of null(A_S) from the right singular vectors.
  Matrix z;
  if (a_s.rows() == 0 || a_s.isZero(0.0)) {
    z = Matrix::Identity(s, s);
  } else {
    Eigen::JacobiSVD<Matrix> svd(a_s, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double cutoff = kRankCutoff * sv(0);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff ? 1 : 0;
    z = svd.matrixV().rightCols(s - rank);
  }
  if (z.cols() == 0) return grad;

  const Matrix reduced = z.transpose() * h.asDiagonal() * z;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced);
  const Vector& ev = eig.eigenvalues();
  const double ev_cut = kRankCutoff * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Vector inv = Vector::Zero(ev.size());
  for (Index i = 0; i < ev.size(); ++i) inv(i) = ev(i) > ev_cut ? 1.0 / ev(i) : 0.0;
  const Matrix& q = eig.eigenvectors();
  const Vector proj = q.transpose() * (z.transpose() * u);
  const Vector g_s = -(z * (q * inv.cwiseProduct(proj)));
  for (Index j = 0; j < s; ++j) grad(support[static_cast<size_t>(j)]) = g_s(j);
  return grad;
}

}  // namespace dfl
