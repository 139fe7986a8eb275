#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfl/linalg.hpp"
#include "dfl/problems.hpp"

namespace dfl {

class Problem;

enum class DysMode { FixedIterations, ToConvergence };

enum class VjpMode {
  /// Derivative of the smoothed solution restricted to the active face found
  /// by the forward pass.
  ActiveSet,
  /// Single-iteration Jacobian-free product, -alpha * (I - A^+ A) * mask.
  JacobianFree,
};

std::string to_string(DysMode m);
std::string to_string(VjpMode m);
DysMode dys_mode_from_string(const std::string& s);
VjpMode vjp_mode_from_string(const std::string& s);

struct DysConfig {
  /// Weight of the (rho/2)||w||^2 smoothing term.
  double rho = 1.0;
  /// Step size, 0 < alpha < 2 / rho.
  double alpha = 1.0;
  int max_iters = 100;
  double tol = 1e-6;
  DysMode mode = DysMode::FixedIterations;
  VjpMode vjp = VjpMode::ActiveSet;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  std::string describe() const;
};

/// Three-operator splitting layer for
///   min cost^T w + (rho/2) sum_{i original} w_i^2   s.t.  A w = b, w >= 0
/// over a standard-form LP. Slack coordinates are not regularized.
class DysLayer {
 public:
  DysLayer(const StandardFormLP& lp, DysConfig cfg);
  DysLayer(const Problem& problem, DysConfig cfg);

  const AffineProjector& projector() const { return projector_; }
  const DysConfig& config() const { return cfg_; }
  /// Replaces the configuration; records from before become stale.
  void set_config(DysConfig cfg);

  /// 1 on regularized (original) coordinates, 0 on slacks.
  const Vector& reg_weights() const { return reg_; }
  Index num_vars() const { return projector_.dim(); }
  Index num_original_vars() const { return num_original_; }
  std::uint64_t id() const { return id_; }

  /// Embeds a cost over the original variables (zero on slacks).
  Vector embed(const Vector& original_cost) const;

 private:
  AffineProjector projector_;
  DysConfig cfg_;
  Vector reg_;
  Index num_original_ = 0;
  std::uint64_t id_ = 0;
};

struct DysForwardRecord {
  Vector final_iterate;
  /// project_nonneg(final_iterate).
  Vector output;
  std::vector<bool> active_mask;
  double residual = 0.0;
  int iters_used = 0;
  bool converged = false;
  std::uint64_t layer_id = 0;
};

/// Runs the fixed-point iteration from warm_start, or from project_affine(0)
/// when warm_start is null or has the wrong size. cost is in standard-form
/// space. Throws std::runtime_error on a non-finite iterate.
DysForwardRecord dys_forward(const DysLayer& layer, const Vector& cost, const Vector* warm_start = nullptr);

/// upstream^T d(output)/d(cost) in standard-form space, per the layer's VJP
/// mode. Throws std::invalid_argument if the record came from another layer
/// or an earlier configuration.
Vector dys_vjp(const DysLayer& layer, const DysForwardRecord& record, const Vector& upstream);

}  // namespace dfl
