#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfl/dys_layer.hpp"
#include "dfl/linalg.hpp"
#include "dfl/rng.hpp"
#include "dfl/solvers.hpp"

namespace dfl {

class Problem;

enum class LossKind { Regret, SqDE, SPOplus, SCE_yhat, SCE_diff, MSE };
enum class GradPath { Subgradient, ThroughLayer };
/// Solver used for w*(.) on the subgradient path.
enum class SubgradSolver { Exact, Relaxed, Cached };

std::string to_string(LossKind k);
std::string to_string(GradPath p);
std::string to_string(SubgradSolver s);
LossKind loss_kind_from_string(const std::string& s);
GradPath grad_path_from_string(const std::string& s);
SubgradSolver subgrad_solver_from_string(const std::string& s);

struct LossSpec {
  LossKind kind = LossKind::SCE_diff;
  GradPath path = GradPath::ThroughLayer;
  SubgradSolver solver = SubgradSolver::Exact;
  /// Solve probability for SubgradSolver::Cached.
  double cache_probability = 0.05;
  DysConfig dys;

  /// Regret and SqDE have no informative subgradient; MSE needs no path.
  void validate() const;
  bool needs_layer() const { return kind != LossKind::MSE && path == GradPath::ThroughLayer; }
  std::string label() const;
};

struct LossEval {
  double value = 0.0;
  /// Gradient w.r.t. the prediction handed to the evaluator (full min-sense
  /// cost for the *_eval functions, model output for evaluate_loss).
  Vector grad;
  /// y^T (w(yhat) - w*) for the solution the loss used at yhat; NaN when the
  /// loss never forms w(yhat) (SPO+ evaluates at 2 yhat - y).
  double regret = 0.0;
  std::int64_t solve_calls = 0;
  std::int64_t layer_calls = 0;
};

/// Everything a loss may need besides the three vectors. layer is required
/// on the ThroughLayer path, cache and rng for SubgradSolver::Cached.
/// warm_start, when set, seeds the forward pass and receives its final
/// iterate.
struct LossContext {
  const Problem* problem = nullptr;
  const DysLayer* layer = nullptr;
  SolutionCache* cache = nullptr;
  CounterRng* rng = nullptr;
  Vector* warm_start = nullptr;
};

/// All four take min-sense costs over the problem's LP variables: y is the
/// true cost, yhat the predicted cost, wstar an optimal solution for y.
LossEval regret_eval(const LossSpec& spec, const LossContext& ctx, const Vector& y, const Vector& yhat,
                     const Vector& wstar);
LossEval sqde_eval(const LossSpec& spec, const LossContext& ctx, const Vector& y, const Vector& yhat,
                   const Vector& wstar);
LossEval spo_plus_eval(const LossSpec& spec, const LossContext& ctx, const Vector& y, const Vector& yhat,
                       const Vector& wstar);
/// spec.kind selects SCE_yhat or SCE_diff.
LossEval sce_eval(const LossSpec& spec, const LossContext& ctx, const Vector& y, const Vector& yhat,
                  const Vector& wstar);

/// ||yhat - y||^2 / K with gradient 2 (yhat - y) / K. No solver involved.
LossEval mse_eval(const Vector& y, const Vector& yhat);

/// Maps predictions through the problem's cost map, dispatches on spec.kind
/// and pulls the gradient back to prediction space.
LossEval evaluate_loss(const LossSpec& spec, const LossContext& ctx, const Vector& y_pred, const Vector& yhat_pred,
                       const Vector& wstar);

/// Regret of one instance with exact solves, costs in prediction space.
double instance_regret(const Problem& problem, const Vector& y_pred, const Vector& yhat_pred, const Vector& wstar);

/// mean_i (y_i^T (w(yhat_i) - w*_i)) / |y_i^T w*_i| with exact solves.
/// Rows of y, yhat are prediction-space vectors, rows of wstar solutions.
/// Throws std::domain_error naming the instance on a zero denominator.
double normalized_regret(const Problem& problem, const Matrix& y, const Matrix& yhat, const Matrix& wstar);
/// Same statistic from precomputed objective values.
double normalized_regret(const std::vector<double>& induced_obj, const std::vector<double>& optimal_obj);

}  // namespace dfl
