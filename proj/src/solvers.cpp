#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfl/problem.hpp"
#include "dfl/solvers.hpp"

namespace dfl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Depth-first branch and bound for the 0/1 multi-dimensional knapsack.
class KnapsackSearch {
 public:
  KnapsackSearch(const MultiKnapsack& spec, const Vector& values) : spec_(spec), values_(values) {
    const Index n = spec.num_items();
    for (Index i = 0; i < n; ++i) {
      if (values(i) > 0.0) order_.push_back(i);
    }
    // Branching order: value per unit of capacity-normalized aggregate weight.
    std::vector<double> ratio(static_cast<size_t>(n), 0.0);
    for (Index i : order_) {
      double agg = 0.0;
      for (Index j = 0; j < spec.num_dims(); ++j) {
        const double cap = spec.capacities(j);
        agg += cap > 0.0 ? spec.weights(j, i) / cap : (spec.weights(j, i) > 0.0 ? kInf : 0.0);
      }
      ratio[static_cast<size_t>(i)] = agg > 0.0 ? values(i) / agg : kInf;
    }
    std::stable_sort(order_.begin(), order_.end(), [&](Index a, Index b) {
      return ratio[static_cast<size_t>(a)] > ratio[static_cast<size_t>(b)];
    });
    position_.assign(static_cast<size_t>(n), -1);
    for (size_t p = 0; p < order_.size(); ++p) position_[static_cast<size_t>(order_[p])] = static_cast<Index>(p);

    // Per-dimension fractional orders for the bound.
    dim_orders_.resize(static_cast<size_t>(spec.num_dims()));
    for (Index j = 0; j < spec.num_dims(); ++j) {
      auto& ord = dim_orders_[static_cast<size_t>(j)];
      ord = order_;
      std::stable_sort(ord.begin(), ord.end(), [&](Index a, Index b) {
        const double wa = spec.weights(j, a), wb = spec.weights(j, b);
        const double ra = wa > 0.0 ? values(a) / wa : kInf;
        const double rb = wb > 0.0 ? values(b) / wb : kInf;
        return ra > rb;
      });
    }
    chosen_.assign(static_cast<size_t>(n), false);
    best_.assign(static_cast<size_t>(n), false);
    remaining_ = spec.capacities;
  }

  SolveResult run() {
    dfs(0, 0.0);
    SolveResult res;
    res.solution = Vector::Zero(spec_.num_items());
    for (Index i = 0; i < spec_.num_items(); ++i) res.solution(i) = best_[static_cast<size_t>(i)] ? 1.0 : 0.0;
    res.objective = values_.dot(res.solution);
    res.iterations = nodes_;
    return res;
  }

 private:
  // Fractional bound using only dimension j's capacity, over items not yet
  // decided at this depth.
  double dim_bound(Index j, size_t depth) const {
    double cap = remaining_(j);
    double bound = 0.0;
    for (Index i : dim_orders_[static_cast<size_t>(j)]) {
      if (static_cast<size_t>(position_[static_cast<size_t>(i)]) < depth) continue;
      const double w = spec_.weights(j, i);
      if (w <= cap) {
        cap -= w;
        bound += values_(i);
      } else {
        bound += values_(i) * cap / w;
        break;
      }
    }
    return bound;
  }

  double bound(size_t depth) const {
    double b = kInf;
    for (Index j = 0; j < spec_.num_dims(); ++j) b = std::min(b, dim_bound(j, depth));
    return b;
  }

  bool fits(Index item) const {
    for (Index j = 0; j < spec_.num_dims(); ++j) {
      if (spec_.weights(j, item) > remaining_(j) + 1e-12) return false;
    }
    return true;
  }

  void dfs(size_t depth, double value) {
    ++nodes_;
    if (value > best_value_ + 1e-12) {
      best_value_ = value;
      best_ = chosen_;
    }
    if (depth == order_.size()) return;
    if (value + bound(depth) <= best_value_ + 1e-12) return;

    const Index item = order_[depth];
    if (fits(item)) {
      chosen_[static_cast<size_t>(item)] = true;
      for (Index j = 0; j < spec_.num_dims(); ++j) remaining_(j) -= spec_.weights(j, item);
      dfs(depth + 1, value + values_(item));
      for (Index j = 0; j < spec_.num_dims(); ++j) remaining_(j) += spec_.weights(j, item);
      chosen_[static_cast<size_t>(item)] = false;
    }
    dfs(depth + 1, value);
  }

  const MultiKnapsack& spec_;
  const Vector& values_;
  std::vector<Index> order_;
  std::vector<Index> position_;
  std::vector<std::vector<Index>> dim_orders_;
  std::vector<bool> chosen_, best_;
  Vector remaining_;
  double best_value_ = 0.0;
  std::int64_t nodes_ = 0;
};

struct BranchNode {
  Vector lower;
  Vector upper;
};

}  // namespace

SolveResult dag_sp_solve(const GridSP& g, const Vector& cost) {
  if (cost.size() != g.num_edges()) {
    throw std::invalid_argument("dag_sp_solve: expected " + std::to_string(g.num_edges()) + " edge costs, got " +
                                std::to_string(cost.size()));
  }
  const Index n = g.num_nodes();
  const Index per_dir = static_cast<Index>(g.k) * (g.k - 1);
  std::vector<double> dist(static_cast<size_t>(n), kInf);
  std::vector<Index> pred_edge(static_cast<size_t>(n), -1);
  dist[0] = 0.0;
  // Row-major node order is topological: edges go +1 (east) or +k (north).
  for (int r = 0; r < g.k; ++r) {
    for (int c = 0; c < g.k; ++c) {
      const Index v = g.node(r, c);
      const double dv = dist[static_cast<size_t>(v)];
      if (c + 1 < g.k) {
        const Index e = static_cast<Index>(r) * (g.k - 1) + c;
        const Index u = v + 1;
        if (dv + cost(e) < dist[static_cast<size_t>(u)]) {
          dist[static_cast<size_t>(u)] = dv + cost(e);
          pred_edge[static_cast<size_t>(u)] = e;
        }
      }
      if (r + 1 < g.k) {
        const Index e = per_dir + v;
        const Index u = v + g.k;
        if (dv + cost(e) < dist[static_cast<size_t>(u)]) {
          dist[static_cast<size_t>(u)] = dv + cost(e);
          pred_edge[static_cast<size_t>(u)] = e;
        }
      }
    }
  }
  SolveResult res;
  res.solution = Vector::Zero(g.num_edges());
  for (Index v = g.sink(); v != g.source();) {
    const Index e = pred_edge[static_cast<size_t>(v)];
    res.solution(e) = 1.0;
    v = g.edge(e).first;
  }
  res.objective = cost.dot(res.solution);
  res.iterations = n;
  return res;
}

SolveResult knapsack_bb(const MultiKnapsack& spec, const Vector& values) {
  spec.validate();
  if (values.size() != spec.num_items()) throw std::invalid_argument("knapsack_bb: values length differs from item count");
  if (!values.allFinite()) throw std::invalid_argument("knapsack_bb: non-finite values");
  return KnapsackSearch(spec, values).run();
}

SolveResult topk_solve(Index m, Index k, const Vector& values) {
  TopKSelection{m, k}.validate();
  if (values.size() != m) throw std::invalid_argument("topk_solve: values length differs from M");
  std::vector<Index> idx(static_cast<size_t>(m));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return values(a) > values(b); });
  SolveResult res;
  res.solution = Vector::Zero(m);
  for (Index r = 0; r < k; ++r) {
    const Index i = idx[static_cast<size_t>(r)];
    if (values(i) <= 0.0) break;
    res.solution(i) = 1.0;
  }
  res.objective = values.dot(res.solution);
  return res;
}

Vector top1_qp_exact(const Vector& values, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("top1_qp_exact: rho must be positive");
  const Index m = values.size();
  Vector w = (values / rho).cwiseMax(0.0);
  if (w.sum() <= 1.0) return w;  // budget row inactive, multiplier 0

  // sum_i max(0, (y_i - lambda)/rho) = 1, solved on the sorted support.
  std::vector<double> sorted(values.data(), values.data() + m);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double lambda = 0.0;
  for (Index s = 0; s < m; ++s) {
    prefix += sorted[static_cast<size_t>(s)];
    const double cand = (prefix - rho) / static_cast<double>(s + 1);
    const double next = s + 1 < m ? sorted[static_cast<size_t>(s + 1)] : -kInf;
    if (cand >= next) {
      lambda = cand;
      break;
    }
  }
  return ((values.array() - lambda) / rho).cwiseMax(0.0).matrix();
}

SolveResult milp_solve(const LinearProgram& lp, const Vector& cost) {
  lp.validate();
  if (lp.num_integers() > kMaxBinaryVars) {
    throw std::length_error("instance too large: " + std::to_string(lp.num_integers()) +
                            " integer variables exceed the budget of " + std::to_string(kMaxBinaryVars));
  }
  if (cost.size() != lp.num_vars) throw std::invalid_argument("milp_solve: cost length differs from num_vars");
  const double sign = lp.sense == Sense::Max ? -1.0 : 1.0;
  const Vector min_cost = sign * cost;
  const Index n = lp.num_vars;

  auto solve_node = [&](const BranchNode& node) {
    LinearProgram sub = lp.relaxation();
    sub.sense = Sense::Min;
    sub.upper_bounds = node.upper;
    std::vector<Index> lower_rows;
    for (Index i = 0; i < n; ++i)
      if (node.lower(i) > 0.0) lower_rows.push_back(i);
    if (!lower_rows.empty()) {
      const Index r0 = sub.ineq_c.rows();
      const auto extra = static_cast<Index>(lower_rows.size());
      sub.ineq_c.conservativeResize(r0 + extra, n);
      sub.ineq_d.conservativeResize(r0 + extra);
      for (Index r = 0; r < extra; ++r) {
        sub.ineq_c.row(r0 + r).setZero();
        sub.ineq_c(r0 + r, lower_rows[static_cast<size_t>(r)]) = -1.0;
        sub.ineq_d(r0 + r) = -node.lower(lower_rows[static_cast<size_t>(r)]);
      }
    }
    for (Index i = 0; i < n; ++i) {
      if (node.upper(i) < node.lower(i) - 1e-9) {
        SolveResult r;
        r.status = SolveStatus::Infeasible;
        return r;
      }
    }
    const StandardFormLP sf = to_standard_form(sub);
    SolveResult r = simplex_solve(sf, sf.embed_cost(min_cost));
    if (r.optimal()) r.solution = r.solution.head(n).eval();
    return r;
  };

  SolveResult best;
  best.status = SolveStatus::Infeasible;
  double best_obj = kInf;
  std::int64_t nodes = 0;

  std::vector<BranchNode> stack;
  stack.push_back({Vector::Zero(n), lp.upper_bounds});
  while (!stack.empty()) {
    BranchNode node = std::move(stack.back());
    stack.pop_back();
    ++nodes;
    SolveResult r = solve_node(node);
    if (r.status == SolveStatus::Unbounded) {
      best.status = SolveStatus::Unbounded;
      best.iterations = nodes;
      return best;
    }
    if (!r.optimal() || r.objective >= best_obj - 1e-9) continue;

    Index branch = -1;
    for (Index i = 0; i < n; ++i) {
      if (!lp.integer_mask[static_cast<size_t>(i)]) continue;
      const double v = r.solution(i);
      if (std::abs(v - std::round(v)) > 1e-7) {
        branch = i;
        break;
      }
    }
    if (branch < 0) {
      best_obj = r.objective;
      best = r;
      for (Index i = 0; i < n; ++i)
        if (lp.integer_mask[static_cast<size_t>(i)]) best.solution(i) = std::round(best.solution(i));
      continue;
    }
    const double v = r.solution(branch);
    BranchNode down = node, up = node;
    down.upper(branch) = std::floor(v);
    up.lower(branch) = std::ceil(v);
    // Explore the up branch first (pushed last).
    stack.push_back(std::move(down));
    stack.push_back(std::move(up));
  }
  if (best.optimal()) best.objective = cost.dot(best.solution);
  best.iterations = nodes;
  return best;
}

SolveResult cfl_solve(const FacilityLocation& spec, const Vector& cost) {
  spec.validate();
  const Index nf = spec.num_facilities();
  const Index nc = spec.num_customers();
  if (nf > kMaxBinaryVars) {
    throw std::length_error("instance too large: " + std::to_string(nf) + " facilities exceed the budget of " +
                            std::to_string(kMaxBinaryVars));
  }
  if (cost.size() != spec.num_vars()) throw std::invalid_argument("cfl_solve: cost length differs from variable count");

  const double total_demand = spec.demands.sum();
  SolveResult best;
  best.status = SolveStatus::Infeasible;
  best.solution = Vector::Zero(spec.num_vars());
  double best_obj = kInf;
  std::int64_t iters = 0;

  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << nf); ++mask) {
    std::vector<Index> open;
    double cap = 0.0, fixed = 0.0;
    for (Index f = 0; f < nf; ++f) {
      if (mask & (std::uint64_t{1} << f)) {
        open.push_back(f);
        cap += spec.capacities(f);
        fixed += cost(spec.open_var(f));
      }
    }
    if (cap < total_demand - 1e-9) continue;

    // Transportation LP over w_{c,f}, f open: sum_f w = 1, sum_c D_c w <= Cap_f.
    const auto no = static_cast<Index>(open.size());
    const Index nw = nc * no;
    Matrix a = Matrix::Zero(nc + no, nw + no);
    Vector b = Vector::Zero(nc + no);
    Vector c = Vector::Zero(nw + no);
    for (Index ci = 0; ci < nc; ++ci) {
      b(ci) = 1.0;
      for (Index k = 0; k < no; ++k) {
        const Index col = ci * no + k;
        a(ci, col) = 1.0;
        a(nc + k, col) = spec.demands(ci);
        c(col) = cost(spec.assign_var(ci, open[static_cast<size_t>(k)]));
      }
    }
    for (Index k = 0; k < no; ++k) {
      a(nc + k, nw + k) = 1.0;
      b(nc + k) = spec.capacities(open[static_cast<size_t>(k)]);
    }
    SolveResult r = simplex_solve(a, b, c);
    iters += r.iterations;
    if (!r.optimal()) continue;
    const double obj = r.objective + fixed;
    if (obj < best_obj - 1e-9) {
      best_obj = obj;
      best.status = SolveStatus::Optimal;
      best.solution.setZero();
      for (Index ci = 0; ci < nc; ++ci)
        for (Index k = 0; k < no; ++k)
          best.solution(spec.assign_var(ci, open[static_cast<size_t>(k)])) = r.solution(ci * no + k);
      for (Index f : open) best.solution(spec.open_var(f)) = 1.0;
    }
  }
  if (best.optimal()) best.objective = cost.dot(best.solution);
  best.iterations = iters;
  return best;
}

bool SolutionCache::insert(const Vector& w) {
  for (const auto& p : pool) {
    if (p.size() == w.size() && (p - w).lpNorm<Eigen::Infinity>() <= 1e-9) return false;
  }
  pool.push_back(w);
  return true;
}

CacheOutcome cache_solve(SolutionCache& cache, const Problem& problem, const Vector& cost, CounterRng& rng) {
  if (cache.pool.empty()) throw std::invalid_argument("cache_solve: empty solution pool");
  CacheOutcome out;
  // The draw is consumed even when p is 0 or 1 so streams stay aligned.
  const double u = rng.uniform();
  if (u < cache.solve_probability) {
    SolveResult r = problem.solve(cost);
    if (!r.optimal()) throw std::runtime_error("cache_solve: exact solve returned " + to_string(r.status));
    cache.insert(r.solution);
    out.solution = std::move(r.solution);
    out.solved = true;
    return out;
  }
  size_t best = 0;
  double best_val = cost.dot(cache.pool[0]);
  for (size_t i = 1; i < cache.pool.size(); ++i) {
    const double v = cost.dot(cache.pool[i]);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  out.solution = cache.pool[best];
  return out;
}

}  // namespace dfl
