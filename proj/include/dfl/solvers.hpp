#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfl/linalg.hpp"
#include "dfl/problems.hpp"
#include "dfl/rng.hpp"

namespace dfl {

enum class SolveStatus { Optimal, Infeasible, Unbounded };

std::string to_string(SolveStatus s);

struct SolveResult {
  Vector solution;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  std::int64_t iterations = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct SimplexOptions {
  /// Ratio-test and reduced-cost tolerance.
  double tol = 1e-9;
  /// Most-negative reduced cost entering rule; falls back to Bland after a
  /// run of degenerate pivots. Off by default.
  bool dantzig = false;
  std::int64_t max_iterations = 1'000'000;
};

/// Two-phase dense tableau simplex with Bland's rule on min cost^T w,
/// A w = b, w >= 0. Returns a basic (vertex) solution.
SolveResult simplex_solve(const StandardFormLP& lp, const Vector& cost, const SimplexOptions& opts = {});
SolveResult simplex_solve(const Matrix& a, const Vector& b, const Vector& cost, const SimplexOptions& opts = {});

/// Minimum-cost monotone southwest-to-northeast path; 0/1 edge indicator.
/// Costs may be negative (the grid is acyclic). Ties keep the first
/// predecessor found in node order, east edge before north edge.
SolveResult dag_sp_solve(const GridSP& g, const Vector& cost);

/// Maximizes values^T w over the 0/1 points of the multi-dimensional knapsack
/// by depth-first branch and bound. Objective is the selected value.
SolveResult knapsack_bb(const MultiKnapsack& spec, const Vector& values);

/// Indicator of the (at most) k largest strictly positive values; ties go to
/// the lowest index. Objective is the selected value.
SolveResult topk_solve(Index m, Index k, const Vector& values);

/// argmax y^T w - (rho/2)||w||^2 over {w >= 0, 1^T w <= 1}, closed form by
/// water-filling on the multiplier of the budget row.
Vector top1_qp_exact(const Vector& values, double rho);

/// Maximum number of integer variables accepted by the exact MILP routines.
inline constexpr Index kMaxBinaryVars = 24;

/// Exact MILP by branch and bound on the LP relaxation. The cost is read in
/// the LP's own sense; objective = cost^T solution. Throws
/// std::length_error("instance too large") beyond kMaxBinaryVars integers.
SolveResult milp_solve(const LinearProgram& lp, const Vector& cost);

/// Capacitated facility location by enumerating open-facility subsets and
/// solving each remaining transportation LP with simplex. The cost covers
/// every variable of build_cfl (assignment costs, then fixed costs), min sense.
SolveResult cfl_solve(const FacilityLocation& spec, const Vector& cost);

class Problem;

/// Pool of feasible solutions standing in for the exact solver.
struct SolutionCache {
  std::vector<Vector> pool;
  double solve_probability = 1.0;

  /// Adds w unless an identical vector (to 1e-9) is already present.
  bool insert(const Vector& w);
};

struct CacheOutcome {
  Vector solution;
  bool solved = false;
};

/// With probability p solves exactly and adds the result to the pool;
/// otherwise returns argmin over the pool of cost^T w (first on ties).
/// Cost is min-sense over the problem's variables.
CacheOutcome cache_solve(SolutionCache& cache, const Problem& problem, const Vector& cost, CounterRng& rng);

}  // namespace dfl
