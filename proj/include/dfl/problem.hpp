#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dfl/linalg.hpp"
#include "dfl/problems.hpp"
#include "dfl/solvers.hpp"

namespace dfl {

enum class Family { ShortestPath, Knapsack, TopK, FacilityLocation, Toy1D, Generic };

std::string to_string(Family f);

/// Affine map from a predicted parameter vector (length pred_dim) to the
/// min-sense cost over all LP variables:
///   cost[i] = scale[i] * pred[i] + offset[i]   for i < pred_dim
///   cost[i] = offset[i]                        otherwise.
struct CostMap {
  Index pred_dim = 0;
  Vector scale;
  Vector offset;

  Vector full_cost(const Vector& pred) const;
  /// Chain rule: gradient w.r.t. pred from a gradient w.r.t. the full cost.
  Vector pullback(const Vector& grad_cost) const;
};

/// A problem instance bundled with its exact solver, its LP relaxation in
/// standard form and the map from predictions to min-sense costs.
///
/// Max-sense families (knapsack, top-k) predict item values and use
/// scale = -1. Facility location predicts per-unit transport costs y_{c,f};
/// the objective coefficient of w_{c,f} is D_c * y_{c,f} and the fixed costs
/// enter through the offset.
class Problem {
 public:
  static Problem shortest_path(int k);
  static Problem knapsack(MultiKnapsack spec);
  static Problem topk(Index m, Index k);
  static Problem facility_location(FacilityLocation spec);
  static Problem toy1d();
  /// Any LP/ILP; identity cost map in min sense (max-sense LPs get scale -1).
  static Problem generic(LinearProgram lp);

  Family family() const { return family_; }
  const LinearProgram& lp() const { return lp_; }
  const StandardFormLP& relaxation() const { return relaxation_; }
  const CostMap& cost_map() const { return cost_map_; }
  Index num_vars() const { return lp_.num_vars; }
  Index pred_dim() const { return cost_map_.pred_dim; }

  const GridSP& grid() const;
  const MultiKnapsack& knapsack_spec() const;
  const FacilityLocation& cfl_spec() const;
  const TopKSelection& topk_spec() const;

  /// Exact solve with the family's combinatorial oracle, min-sense cost over
  /// the LP variables. objective = cost^T solution.
  SolveResult solve(const Vector& cost) const;
  /// LP relaxation by simplex, same conventions.
  SolveResult solve_relaxation(const Vector& cost) const;

  bool is_feasible(const Vector& w, double tol = 1e-7) const;

  /// Short identifier such as "sp5" or "knapsack20x2".
  std::string name() const;
  nlohmann::json to_json() const;
  static Problem from_json(const nlohmann::json& j);

 private:
  Problem(Family f, LinearProgram lp, CostMap map);

  Family family_;
  LinearProgram lp_;
  StandardFormLP relaxation_;
  CostMap cost_map_;
  std::optional<GridSP> grid_;
  std::optional<MultiKnapsack> knapsack_;
  std::optional<FacilityLocation> cfl_;
  std::optional<TopKSelection> topk_;
};

}  // namespace dfl
