#include "dfl/problems.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dfl/rng.hpp"

namespace dfl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LinearProgram empty_lp(Index n, Sense sense) {
  LinearProgram lp;
  lp.num_vars = n;
  lp.sense = sense;
  lp.eq_a = Matrix::Zero(0, n);
  lp.eq_b = Vector::Zero(0);
  lp.ineq_c = Matrix::Zero(0, n);
  lp.ineq_d = Vector::Zero(0);
  lp.integer_mask.assign(static_cast<size_t>(n), false);
  lp.upper_bounds = Vector::Constant(n, kInf);
  return lp;
}

}  // namespace

void LinearProgram::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("LinearProgram: " + what); };
  if (num_vars <= 0) fail("num_vars must be positive");
  if (eq_a.cols() != num_vars) fail("eq_a column count differs from num_vars");
  if (eq_a.rows() != eq_b.size()) fail("eq_a rows differ from eq_b length");
  if (ineq_c.cols() != num_vars) fail("ineq_c column count differs from num_vars");
  if (ineq_c.rows() != ineq_d.size()) fail("ineq_c rows differ from ineq_d length");
  if (static_cast<Index>(integer_mask.size()) != num_vars) fail("integer_mask length differs from num_vars");
  if (upper_bounds.size() != num_vars) fail("upper_bounds length differs from num_vars");
  if (!eq_a.allFinite() || !eq_b.allFinite() || !ineq_c.allFinite() || !ineq_d.allFinite()) {
    fail("non-finite constraint data");
  }
}

bool LinearProgram::has_integers() const { return num_integers() > 0; }

Index LinearProgram::num_integers() const {
  Index n = 0;
  for (bool b : integer_mask) n += b ? 1 : 0;
  return n;
}

bool LinearProgram::has_upper_bound(Index i) const { return std::isfinite(upper_bounds(i)); }

LinearProgram LinearProgram::relaxation() const {
  LinearProgram r = *this;
  r.integer_mask.assign(integer_mask.size(), false);
  return r;
}

Vector StandardFormLP::embed_cost(const Vector& original_cost) const {
  if (original_cost.size() != num_original_vars) {
    throw std::invalid_argument("embed_cost: expected " + std::to_string(num_original_vars) +
                                " entries, got " + std::to_string(original_cost.size()));
  }
  Vector c = Vector::Zero(num_vars());
  c.head(num_original_vars) = original_cost;
  return c;
}

Vector StandardFormLP::lift(const Vector& x, const LinearProgram& src) const {
  Vector w = Vector::Zero(num_vars());
  w.head(num_original_vars) = x;
  Index s = slack_offset;
  for (Index r = 0; r < src.ineq_c.rows(); ++r) w(s++) = src.ineq_d(r) - src.ineq_c.row(r).dot(x);
  for (Index i = 0; i < src.num_vars; ++i) {
    if (src.has_upper_bound(i)) w(s++) = src.upper_bounds(i) - x(i);
  }
  return w;
}

StandardFormLP to_standard_form(const LinearProgram& lp) {
  lp.validate();
  const Index n = lp.num_vars;
  const Index n_ineq = lp.ineq_c.rows();
  Index n_bounds = 0;
  for (Index i = 0; i < n; ++i) n_bounds += lp.has_upper_bound(i) ? 1 : 0;

  const Index rows = lp.eq_a.rows() + n_ineq + n_bounds;
  const Index cols = n + n_ineq + n_bounds;

  StandardFormLP sf;
  sf.a = Matrix::Zero(rows, cols);
  sf.b = Vector::Zero(rows);
  sf.num_original_vars = n;
  sf.slack_offset = n;
  sf.cost_sign = lp.sense == Sense::Max ? -1.0 : 1.0;

  Index r = 0;
  for (Index i = 0; i < lp.eq_a.rows(); ++i, ++r) {
    sf.a.row(r).head(n) = lp.eq_a.row(i);
    sf.b(r) = lp.eq_b(i);
  }
  Index s = n;
  for (Index i = 0; i < n_ineq; ++i, ++r, ++s) {
    sf.a.row(r).head(n) = lp.ineq_c.row(i);
    sf.a(r, s) = 1.0;
    sf.b(r) = lp.ineq_d(i);
  }
  for (Index i = 0; i < n; ++i) {
    if (!lp.has_upper_bound(i)) continue;
    sf.a(r, i) = 1.0;
    sf.a(r, s) = 1.0;
    sf.b(r) = lp.upper_bounds(i);
    ++r;
    ++s;
  }
  return sf;
}

GridSP::GridSP(int side) : k(side) {
  if (side < 2) throw std::invalid_argument("GridSP: grid side must be >= 2, got " + std::to_string(side));
}

std::pair<Index, Index> GridSP::edge(Index e) const {
  const Index per_dir = static_cast<Index>(k) * (k - 1);
  if (e < 0 || e >= num_edges()) throw std::out_of_range("GridSP::edge: index out of range");
  if (e < per_dir) {
    const Index row = e / (k - 1);
    const Index col = e % (k - 1);
    return {row * k + col, row * k + col + 1};
  }
  const Index f = e - per_dir;
  const Index row = f / k;
  const Index col = f % k;
  return {row * k + col, (row + 1) * k + col};
}

Matrix GridSP::incidence() const {
  Matrix m = Matrix::Zero(num_nodes(), num_edges());
  for (Index e = 0; e < num_edges(); ++e) {
    auto [tail, head] = edge(e);
    m(tail, e) = 1.0;
    m(head, e) = -1.0;
  }
  return m;
}

void MultiKnapsack::validate() const {
  if (weights.cols() == 0 || weights.rows() == 0) throw std::invalid_argument("MultiKnapsack: empty weights");
  if (capacities.size() != weights.rows()) {
    throw std::invalid_argument("MultiKnapsack: capacities length differs from weight dimensions");
  }
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("MultiKnapsack: weights must be nonnegative");
  if ((capacities.array() < 0.0).any()) throw std::invalid_argument("MultiKnapsack: capacities must be nonnegative");
}

void FacilityLocation::validate() const {
  if (capacities.size() == 0 || demands.size() == 0) throw std::invalid_argument("FacilityLocation: empty instance");
  if (fixed_costs.size() != capacities.size()) {
    throw std::invalid_argument("FacilityLocation: fixed_costs length differs from capacities");
  }
  if ((capacities.array() <= 0.0).any() || (demands.array() <= 0.0).any()) {
    throw std::invalid_argument("FacilityLocation: capacities and demands must be positive");
  }
  if ((fixed_costs.array() < 0.0).any()) throw std::invalid_argument("FacilityLocation: negative fixed cost");
  if (capacities.sum() < demands.sum()) {
    throw std::invalid_argument("FacilityLocation: total capacity below total demand");
  }
}

void TopKSelection::validate() const {
  if (k < 1 || k > m) {
    throw std::invalid_argument("TopKSelection: need 1 <= K <= M, got M=" + std::to_string(m) +
                                " K=" + std::to_string(k));
  }
}

LinearProgram build_grid_sp(const GridSP& g) {
  LinearProgram lp = empty_lp(g.num_edges(), Sense::Min);
  lp.eq_a = g.incidence();
  lp.eq_b = Vector::Zero(g.num_nodes());
  lp.eq_b(g.source()) = 1.0;
  lp.eq_b(g.sink()) = -1.0;
  return lp;
}

LinearProgram build_grid_sp(int k) { return build_grid_sp(GridSP(k)); }

LinearProgram build_knapsack(const MultiKnapsack& spec) {
  spec.validate();
  const Index n = spec.num_items();
  LinearProgram lp = empty_lp(n, Sense::Max);
  lp.ineq_c = spec.weights;
  lp.ineq_d = spec.capacities;
  lp.integer_mask.assign(static_cast<size_t>(n), true);
  lp.upper_bounds = Vector::Ones(n);
  return lp;
}

LinearProgram build_topk(Index m, Index k) {
  TopKSelection{m, k}.validate();
  LinearProgram lp = empty_lp(m, Sense::Max);
  lp.ineq_c = Matrix::Ones(1, m);
  lp.ineq_d = Vector::Constant(1, static_cast<double>(k));
  lp.integer_mask.assign(static_cast<size_t>(m), true);
  // With K = 1 the row already implies w <= 1.
  if (k > 1) lp.upper_bounds = Vector::Ones(m);
  return lp;
}

LinearProgram build_cfl(const FacilityLocation& spec) {
  spec.validate();
  const Index nf = spec.num_facilities();
  const Index nc = spec.num_customers();
  LinearProgram lp = empty_lp(spec.num_vars(), Sense::Min);

  lp.eq_a = Matrix::Zero(nc, lp.num_vars);
  lp.eq_b = Vector::Ones(nc);
  for (Index c = 0; c < nc; ++c)
    for (Index f = 0; f < nf; ++f) lp.eq_a(c, spec.assign_var(c, f)) = 1.0;

  lp.ineq_c = Matrix::Zero(nf, lp.num_vars);
  lp.ineq_d = Vector::Zero(nf);
  for (Index f = 0; f < nf; ++f) {
    for (Index c = 0; c < nc; ++c) lp.ineq_c(f, spec.assign_var(c, f)) = spec.demands(c);
    lp.ineq_c(f, spec.open_var(f)) = -spec.capacities(f);
  }
  for (Index f = 0; f < nf; ++f) {
    lp.integer_mask[static_cast<size_t>(spec.open_var(f))] = true;
    lp.upper_bounds(spec.open_var(f)) = 1.0;
  }
  return lp;
}

LinearProgram build_toy1d() {
  LinearProgram lp = empty_lp(1, Sense::Min);
  lp.upper_bounds(0) = 1.0;
  return lp;
}

LinearProgram build_pick_one(Index m) {
  if (m < 1) throw std::invalid_argument("build_pick_one: need at least one item");
  LinearProgram lp = empty_lp(m, Sense::Min);
  lp.eq_a = Matrix::Ones(1, m);
  lp.eq_b = Vector::Ones(1);
  return lp;
}

MultiKnapsack random_knapsack(Index items, Index dims, std::uint64_t seed) {
  if (items < 1 || dims < 1) throw std::invalid_argument("random_knapsack: need items >= 1 and dims >= 1");
  CounterRng rng = CounterRng(seed).substream(0x6b6e6170ULL);  // "knap"
  MultiKnapsack spec;
  spec.weights.resize(dims, items);
  for (Index j = 0; j < dims; ++j)
    for (Index i = 0; i < items; ++i) spec.weights(j, i) = static_cast<double>(rng.uniform_int(3, 8));
  spec.capacities = 0.5 * spec.weights.rowwise().sum();
  return spec;
}

FacilityLocation random_cfl(Index facilities, Index customers, std::uint64_t seed, const CflGenOptions& o) {
  if (facilities < 1 || customers < 1) throw std::invalid_argument("random_cfl: empty instance");
  CounterRng rng = CounterRng(seed).substream(0x63666cULL);  // "cfl"
  FacilityLocation spec;
  spec.demands.resize(customers);
  for (Index c = 0; c < customers; ++c) spec.demands(c) = rng.uniform(o.demand_lo, o.demand_hi);
  spec.fixed_costs.resize(facilities);
  for (Index f = 0; f < facilities; ++f) spec.fixed_costs(f) = rng.uniform(o.fixed_lo, o.fixed_hi);
  spec.capacities.resize(facilities);
  for (Index f = 0; f < facilities; ++f) spec.capacities(f) = rng.uniform(0.8, 1.2);
  spec.capacities *= o.capacity_ratio * spec.demands.sum() / spec.capacities.sum();
  return spec;
}

}  // namespace dfl
