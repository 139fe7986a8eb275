#include "dfl/losses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dfl/problem.hpp"

namespace dfl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_inputs(const LossContext& ctx, const Vector& y, const Vector& yhat, const Vector& wstar) {
  if (ctx.problem == nullptr) throw std::invalid_argument("loss: context has no problem");
  const Index n = ctx.problem->num_vars();
  if (y.size() != n || yhat.size() != n || wstar.size() != n) {
    throw std::invalid_argument("loss: expected vectors of length " + std::to_string(n) + ", got y=" +
                                std::to_string(y.size()) + " yhat=" + std::to_string(yhat.size()) +
                                " wstar=" + std::to_string(wstar.size()));
  }
}

struct LayerSolve {
  DysForwardRecord record;
  Vector solution;
};

LayerSolve layer_solve(const LossContext& ctx, const Vector& cost, LossEval& ev) {
  if (ctx.layer == nullptr) throw std::invalid_argument("loss: ThroughLayer path needs a DYS layer");
  const DysLayer& layer = *ctx.layer;
  LayerSolve out;
  out.record = dys_forward(layer, layer.embed(cost), ctx.warm_start);
  if (ctx.warm_start != nullptr) *ctx.warm_start = out.record.final_iterate;
  out.solution = out.record.output.head(layer.num_original_vars());
  ++ev.layer_calls;
  return out;
}

Vector layer_vjp(const LossContext& ctx, const DysForwardRecord& rec, const Vector& upstream) {
  const DysLayer& layer = *ctx.layer;
  return dys_vjp(layer, rec, layer.embed(upstream)).head(layer.num_original_vars());
}

Vector subgrad_solve(const LossSpec& spec, const LossContext& ctx, const Vector& cost, LossEval& ev) {
  SolveResult r;
  switch (spec.solver) {
    case SubgradSolver::Exact:
      r = ctx.problem->solve(cost);
      break;
    case SubgradSolver::Relaxed:
      r = ctx.problem->solve_relaxation(cost);
      break;
    case SubgradSolver::Cached: {
      if (ctx.cache == nullptr || ctx.rng == nullptr) {
        throw std::invalid_argument("loss: cached solver needs a solution cache and an rng");
      }
      CacheOutcome o = cache_solve(*ctx.cache, *ctx.problem, cost, *ctx.rng);
      ev.solve_calls += o.solved ? 1 : 0;
      return o.solution;
    }
  }
  ++ev.solve_calls;
  if (!r.optimal()) throw std::runtime_error("loss: solver returned " + to_string(r.status));
  return r.solution;
}

void require_layer_path(const LossSpec& spec, const char* name) {
  if (spec.path != GradPath::ThroughLayer) {
    throw std::invalid_argument(std::string(name) +
                                " has no informative subgradient; use the ThroughLayer path");
  }
}

}  // namespace

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::Regret: return "regret";
    case LossKind::SqDE: return "sqde";
    case LossKind::SPOplus: return "spo+";
    case LossKind::SCE_yhat: return "sce_yhat";
    case LossKind::SCE_diff: return "sce_diff";
    case LossKind::MSE: return "mse";
  }
  return "unknown";
}

std::string to_string(GradPath p) { return p == GradPath::Subgradient ? "subgradient" : "layer"; }

std::string to_string(SubgradSolver s) {
  switch (s) {
    case SubgradSolver::Exact: return "exact";
    case SubgradSolver::Relaxed: return "relaxed";
    case SubgradSolver::Cached: return "cached";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "regret") return LossKind::Regret;
  if (s == "sqde") return LossKind::SqDE;
  if (s == "spo+" || s == "spoplus" || s == "spo_plus") return LossKind::SPOplus;
  if (s == "sce_yhat") return LossKind::SCE_yhat;
  if (s == "sce_diff" || s == "sce") return LossKind::SCE_diff;
  if (s == "mse") return LossKind::MSE;
  throw std::invalid_argument("unknown loss '" + s + "' (expected regret, sqde, spo+, sce_yhat, sce_diff or mse)");
}

GradPath grad_path_from_string(const std::string& s) {
  if (s == "subgradient") return GradPath::Subgradient;
  if (s == "layer") return GradPath::ThroughLayer;
  throw std::invalid_argument("unknown gradient path '" + s + "' (expected subgradient or layer)");
}

SubgradSolver subgrad_solver_from_string(const std::string& s) {
  if (s == "exact") return SubgradSolver::Exact;
  if (s == "relaxed") return SubgradSolver::Relaxed;
  if (s == "cached") return SubgradSolver::Cached;
  throw std::invalid_argument("unknown solver '" + s + "' (expected exact, relaxed or cached)");
}

void LossSpec::validate() const {
  if ((kind == LossKind::Regret || kind == LossKind::SqDE) && path == GradPath::Subgradient) {
    throw std::invalid_argument(to_string(kind) + " has no informative subgradient; use the layer path");
  }
  if (solver == SubgradSolver::Cached && !(cache_probability >= 0.0 && cache_probability <= 1.0)) {
    throw std::invalid_argument("cache probability must lie in [0, 1]");
  }
  if (needs_layer()) dys.validate();
}

std::string LossSpec::label() const {
  if (kind == LossKind::MSE) return "mse";
  std::string s = to_string(kind) + "/" + to_string(path);
  if (path == GradPath::Subgradient) s += "/" + to_string(solver);
  return s;
}

LossEval regret_eval(const LossSpec& spec, const LossContext& ctx, const Vector& y, const Vector& yhat,
                     const Vector& wstar) {
  require_layer_path(spec, "regret");
  check_inputs(ctx, y, yhat, wstar);
  LossEval ev;
  const LayerSolve ls = layer_solve(ctx, yhat, ev);
  ev.value = y.dot(ls.solution) - y.dot(wstar);
  ev.regret = ev.value;
  ev.grad = layer_vjp(ctx, ls.record, y);
  return ev;
}

LossEval sqde_eval(const LossSpec& spec, const LossContext& ctx, const Vector& y, const Vector& yhat,
                   const Vector& wstar) {
  require_layer_path(spec, "sqde");
  check_inputs(ctx, y, yhat, wstar);
  LossEval ev;
  const LayerSolve ls = layer_solve(ctx, yhat, ev);
  const Vector diff = ls.solution - wstar;
  ev.value = diff.squaredNorm();
  ev.regret = y.dot(diff);
  ev.grad = layer_vjp(ctx, ls.record, 2.0 * diff);
  return ev;
}

LossEval spo_plus_eval(const LossSpec& spec, const LossContext& ctx, const Vector& y, const Vector& yhat,
                       const Vector& wstar) {
  check_inputs(ctx, y, yhat, wstar);
  LossEval ev;
  ev.regret = kNaN;
  const Vector tilted = 2.0 * yhat - y;
  if (spec.path == GradPath::Subgradient) {
    const Vector wt = subgrad_solve(spec, ctx, tilted, ev);
    ev.value = tilted.dot(wstar) - tilted.dot(wt);
    ev.grad = 2.0 * (wstar - wt);
    return ev;
  }
  const LayerSolve ls = layer_solve(ctx, tilted, ev);
  ev.value = tilted.dot(wstar) - tilted.dot(ls.solution);
  // d/dyhat of -(2 yhat - y)^T w(2 yhat - y), chain factor 2 from the tilt.
  ev.grad = 2.0 * (wstar - ls.solution) + 2.0 * layer_vjp(ctx, ls.record, y - 2.0 * yhat);
  return ev;
}

LossEval sce_eval(const LossSpec& spec, const LossContext& ctx, const Vector& y, const Vector& yhat,
                  const Vector& wstar) {
  if (spec.kind != LossKind::SCE_yhat && spec.kind != LossKind::SCE_diff) {
    throw std::invalid_argument("sce_eval: spec.kind must be sce_yhat or sce_diff");
  }
  check_inputs(ctx, y, yhat, wstar);
  LossEval ev;
  const bool diff_variant = spec.kind == LossKind::SCE_diff;
  const Vector weight = diff_variant ? Vector(yhat - y) : yhat;
  if (spec.path == GradPath::Subgradient) {
    const Vector w = subgrad_solve(spec, ctx, yhat, ev);
    ev.value = weight.dot(wstar - w);
    ev.regret = y.dot(w - wstar);
    ev.grad = wstar - w;
    return ev;
  }
  const LayerSolve ls = layer_solve(ctx, yhat, ev);
  ev.value = weight.dot(wstar - ls.solution);
  ev.regret = y.dot(ls.solution - wstar);
  ev.grad = (wstar - ls.solution) - layer_vjp(ctx, ls.record, weight);
  return ev;
}

LossEval mse_eval(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size() || y.size() == 0) throw std::invalid_argument("mse_eval: length mismatch");
  const double k = static_cast<double>(y.size());
  LossEval ev;
  ev.value = (yhat - y).squaredNorm() / k;
  ev.grad = 2.0 * (yhat - y) / k;
  ev.regret = kNaN;
  return ev;
}

LossEval evaluate_loss(const LossSpec& spec, const LossContext& ctx, const Vector& y_pred, const Vector& yhat_pred,
                       const Vector& wstar) {
  if (spec.kind == LossKind::MSE) return mse_eval(y_pred, yhat_pred);
  if (ctx.problem == nullptr) throw std::invalid_argument("evaluate_loss: context has no problem");
  const CostMap& map = ctx.problem->cost_map();
  const Vector y = map.full_cost(y_pred);
  const Vector yhat = map.full_cost(yhat_pred);
  LossEval ev;
  switch (spec.kind) {
    case LossKind::Regret: ev = regret_eval(spec, ctx, y, yhat, wstar); break;
    case LossKind::SqDE: ev = sqde_eval(spec, ctx, y, yhat, wstar); break;
    case LossKind::SPOplus: ev = spo_plus_eval(spec, ctx, y, yhat, wstar); break;
    case LossKind::SCE_yhat:
    case LossKind::SCE_diff: ev = sce_eval(spec, ctx, y, yhat, wstar); break;
    case LossKind::MSE: break;
  }
  ev.grad = map.pullback(ev.grad);
  return ev;
}

double instance_regret(const Problem& problem, const Vector& y_pred, const Vector& yhat_pred, const Vector& wstar) {
  const CostMap& map = problem.cost_map();
  const Vector y = map.full_cost(y_pred);
  const SolveResult r = problem.solve(map.full_cost(yhat_pred));
  if (!r.optimal()) throw std::runtime_error("instance_regret: solver returned " + to_string(r.status));
  return y.dot(r.solution) - y.dot(wstar);
}

double normalized_regret(const Problem& problem, const Matrix& y, const Matrix& yhat, const Matrix& wstar) {
  if (y.rows() != yhat.rows() || y.rows() != wstar.rows() || y.rows() == 0) {
    throw std::invalid_argument("normalized_regret: row counts differ or are zero");
  }
  const CostMap& map = problem.cost_map();
  std::vector<double> induced, optimal;
  induced.reserve(static_cast<size_t>(y.rows()));
  optimal.reserve(static_cast<size_t>(y.rows()));
  for (Index i = 0; i < y.rows(); ++i) {
    const Vector c = map.full_cost(y.row(i).transpose());
    const SolveResult r = problem.solve(map.full_cost(yhat.row(i).transpose()));
    if (!r.optimal()) {
      throw std::runtime_error("normalized_regret: instance " + std::to_string(i) + ": solver returned " +
                               to_string(r.status));
    }
    induced.push_back(c.dot(r.solution));
    optimal.push_back(c.dot(wstar.row(i).transpose()));
  }
  return normalized_regret(induced, optimal);
}

double normalized_regret(const std::vector<double>& induced_obj, const std::vector<double>& optimal_obj) {
  if (induced_obj.size() != optimal_obj.size() || induced_obj.empty()) {
    throw std::invalid_argument("normalized_regret: need equally many, at least one, objective values");
  }
  double sum = 0.0;
  for (size_t i = 0; i < induced_obj.size(); ++i) {
    const double denom = std::abs(optimal_obj[i]);
    if (denom == 0.0) {
      throw std::domain_error("normalized_regret: instance " + std::to_string(i) + " has optimal objective 0");
    }
    sum += (induced_obj[i] - optimal_obj[i]) / denom;
  }
  return sum / static_cast<double>(induced_obj.size());
}

}  // namespace dfl
