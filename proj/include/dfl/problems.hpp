#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dfl/linalg.hpp"

namespace dfl {

enum class Sense { Min, Max };

/// min/max c^T w  s.t.  eq_a w = eq_b,  ineq_c w <= ineq_d,  0 <= w <= upper.
/// Every variable is nonnegative; an infinite upper bound means "none".
struct LinearProgram {
  Index num_vars = 0;
  Sense sense = Sense::Min;
  Matrix eq_a;
  Vector eq_b;
  Matrix ineq_c;
  Vector ineq_d;
  std::vector<bool> integer_mask;
  Vector upper_bounds;

  /// Checks the dimension invariants; throws std::invalid_argument.
  void validate() const;
  bool has_integers() const;
  Index num_integers() const;
  bool has_upper_bound(Index i) const;
  /// Same LP with every integrality flag cleared.
  LinearProgram relaxation() const;
};

/// min y^T w  s.t.  A w = b,  w >= 0.
///
/// The first num_original_vars coordinates are the source LP's variables; the
/// rest are slacks, one per inequality row followed by one per finite upper
/// bound. cost_sign is -1 when the source LP maximizes: callers pass
/// cost_sign * y as the min-sense cost.
struct StandardFormLP {
  Matrix a;
  Vector b;
  Index num_original_vars = 0;
  Index slack_offset = 0;
  double cost_sign = 1.0;

  Index num_vars() const { return a.cols(); }
  /// Embeds a cost over the original variables into the standard-form space
  /// (zero cost on slacks). The cost is used as given, no sign flip.
  Vector embed_cost(const Vector& original_cost) const;
  /// Completes an original-variable point with its slack values.
  Vector lift(const Vector& original_point, const LinearProgram& source) const;
};

StandardFormLP to_standard_form(const LinearProgram& lp);

/// k x k grid, edges go north or east, source is the southwest corner and
/// sink the northeast corner.
///
/// Nodes are row-major with row 0 the southern row: node(r, c) = r * k + c.
/// Edge order: all east edges (r, c) -> (r, c + 1) in row-major order of their
/// tail, then all north edges (r, c) -> (r + 1, c) in row-major order.
struct GridSP {
  int k = 0;

  explicit GridSP(int side);
  Index num_nodes() const { return static_cast<Index>(k) * k; }
  Index num_edges() const { return 2 * static_cast<Index>(k) * (k - 1); }
  Index node(int row, int col) const { return static_cast<Index>(row) * k + col; }
  Index source() const { return 0; }
  Index sink() const { return num_nodes() - 1; }
  /// (tail, head) node indices of edge e.
  std::pair<Index, Index> edge(Index e) const;
  /// Node-by-edge incidence: +1 at the tail, -1 at the head.
  Matrix incidence() const;
};

struct MultiKnapsack {
  Matrix weights;    // dims x items, phi(i, j) stored at (j, i)
  Vector capacities; // per dimension

  Index num_items() const { return weights.cols(); }
  Index num_dims() const { return weights.rows(); }
  void validate() const;
};

struct FacilityLocation {
  Vector capacities;   // per facility
  Vector fixed_costs;  // per facility
  Vector demands;      // per customer

  Index num_facilities() const { return capacities.size(); }
  Index num_customers() const { return demands.size(); }
  /// Index of w_{c,f}; W_f follows all assignment variables.
  Index assign_var(Index c, Index f) const { return c * num_facilities() + f; }
  Index open_var(Index f) const { return num_customers() * num_facilities() + f; }
  Index num_vars() const { return num_customers() * num_facilities() + num_facilities(); }
  void validate() const;
};

struct TopKSelection {
  Index m = 0;
  Index k = 1;
  void validate() const;
};

LinearProgram build_grid_sp(const GridSP& g);
LinearProgram build_grid_sp(int k);
LinearProgram build_knapsack(const MultiKnapsack& spec);
LinearProgram build_topk(Index m, Index k);
LinearProgram build_cfl(const FacilityLocation& spec);
/// min y w  s.t.  0 <= w <= 1.
LinearProgram build_toy1d();
/// Exactly one of m items is chosen: sum w = 1, w >= 0.
LinearProgram build_pick_one(Index m);

/// Random instances with documented defaults.
///
/// Knapsack: integer weights U{3..8}, capacity per dimension = half of that
/// dimension's total weight.
MultiKnapsack random_knapsack(Index items, Index dims, std::uint64_t seed);

struct CflGenOptions {
  double demand_lo = 5.0, demand_hi = 10.0;
  double fixed_lo = 50.0, fixed_hi = 100.0;
  /// Total capacity relative to total demand, split evenly over facilities.
  double capacity_ratio = 2.0;
};
FacilityLocation random_cfl(Index facilities, Index customers, std::uint64_t seed,
                            const CflGenOptions& opts = {});

}  // namespace dfl
