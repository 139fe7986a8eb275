#include "dfl/problem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace dfl {
namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    // JSON has no infinity; an absent upper bound is written as null.
    if (std::isfinite(v(i))) {
      a.push_back(v(i));
    } else {
      a.push_back(nullptr);
    }
  }
  return a;
}

Vector vector_of(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string("problem json: '") + what + "' must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Index>(i)) = j[i].is_null() ? std::numeric_limits<double>::infinity() : j[i].get<double>();
  }
  return v;
}

Matrix matrix_of(const json& j, Index cols, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string("problem json: '") + what + "' must be an array");
  Matrix m(static_cast<Index>(j.size()), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || static_cast<Index>(j[i].size()) != cols) {
      throw std::invalid_argument(std::string("problem json: ragged rows in '") + what + "'");
    }
    for (Index c = 0; c < cols; ++c) m(static_cast<Index>(i), c) = j[i][static_cast<size_t>(c)].get<double>();
  }
  return m;
}

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("problem json: missing field '") + key + "'");
  return j.at(key);
}

CostMap identity_map(Index n, double sign) {
  CostMap m;
  m.pred_dim = n;
  m.scale = Vector::Constant(n, sign);
  m.offset = Vector::Zero(n);
  return m;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::ShortestPath: return "shortest_path";
    case Family::Knapsack: return "knapsack";
    case Family::TopK: return "topk";
    case Family::FacilityLocation: return "facility_location";
    case Family::Toy1D: return "toy1d";
    case Family::Generic: return "generic";
  }
  return "unknown";
}

Vector CostMap::full_cost(const Vector& pred) const {
  if (pred.size() != pred_dim) {
    throw std::invalid_argument("CostMap: expected prediction of length " + std::to_string(pred_dim) + ", got " +
                                std::to_string(pred.size()));
  }
  Vector c = offset;
  c.head(pred_dim) += scale.head(pred_dim).cwiseProduct(pred);
  return c;
}

Vector CostMap::pullback(const Vector& grad_cost) const {
  if (grad_cost.size() != offset.size()) throw std::invalid_argument("CostMap::pullback: gradient length mismatch");
  return scale.head(pred_dim).cwiseProduct(grad_cost.head(pred_dim));
}

Problem::Problem(Family f, LinearProgram lp, CostMap map)
    : family_(f), lp_(std::move(lp)), cost_map_(std::move(map)) {
  lp_.validate();
  relaxation_ = to_standard_form(lp_.relaxation());
  if (cost_map_.offset.size() != lp_.num_vars || cost_map_.scale.size() != lp_.num_vars) {
    throw std::invalid_argument("Problem: cost map does not cover the LP variables");
  }
}

Problem Problem::shortest_path(int k) {
  GridSP g(k);
  Problem p(Family::ShortestPath, build_grid_sp(g), identity_map(g.num_edges(), 1.0));
  p.grid_ = g;
  return p;
}

Problem Problem::knapsack(MultiKnapsack spec) {
  LinearProgram lp = build_knapsack(spec);
  Problem p(Family::Knapsack, std::move(lp), identity_map(spec.num_items(), -1.0));
  p.knapsack_ = std::move(spec);
  return p;
}

Problem Problem::topk(Index m, Index k) {
  Problem p(Family::TopK, build_topk(m, k), identity_map(m, -1.0));
  p.topk_ = TopKSelection{m, k};
  return p;
}

Problem Problem::facility_location(FacilityLocation spec) {
  LinearProgram lp = build_cfl(spec);
  const Index nf = spec.num_facilities();
  const Index nc = spec.num_customers();
  CostMap map;
  map.pred_dim = nc * nf;
  map.scale = Vector::Zero(spec.num_vars());
  map.offset = Vector::Zero(spec.num_vars());
  for (Index c = 0; c < nc; ++c)
    for (Index f = 0; f < nf; ++f) map.scale(spec.assign_var(c, f)) = spec.demands(c);
  for (Index f = 0; f < nf; ++f) map.offset(spec.open_var(f)) = spec.fixed_costs(f);
  Problem p(Family::FacilityLocation, std::move(lp), std::move(map));
  p.cfl_ = std::move(spec);
  return p;
}

Problem Problem::toy1d() { return Problem(Family::Toy1D, build_toy1d(), identity_map(1, 1.0)); }

Problem Problem::generic(LinearProgram lp) {
  lp.validate();
  const Index n = lp.num_vars;
  const double sign = lp.sense == Sense::Max ? -1.0 : 1.0;
  return Problem(Family::Generic, std::move(lp), identity_map(n, sign));
}

const GridSP& Problem::grid() const {
  if (!grid_) throw std::logic_error("Problem::grid: not a shortest-path problem");
  return *grid_;
}

const MultiKnapsack& Problem::knapsack_spec() const {
  if (!knapsack_) throw std::logic_error("Problem::knapsack_spec: not a knapsack problem");
  return *knapsack_;
}

const FacilityLocation& Problem::cfl_spec() const {
  if (!cfl_) throw std::logic_error("Problem::cfl_spec: not a facility-location problem");
  return *cfl_;
}

const TopKSelection& Problem::topk_spec() const {
  if (!topk_) throw std::logic_error("Problem::topk_spec: not a top-k problem");
  return *topk_;
}

SolveResult Problem::solve(const Vector& cost) const {
  if (cost.size() != num_vars()) {
    throw std::invalid_argument("Problem::solve: expected cost of length " + std::to_string(num_vars()) + ", got " +
                                std::to_string(cost.size()));
  }
  if (!cost.allFinite()) throw std::invalid_argument("Problem::solve: non-finite cost");
  SolveResult r;
  switch (family_) {
    case Family::ShortestPath:
      return dag_sp_solve(*grid_, cost);
    case Family::Knapsack:
      r = knapsack_bb(*knapsack_, -cost);
      break;
    case Family::TopK:
      r = topk_solve(topk_->m, topk_->k, -cost);
      break;
    case Family::FacilityLocation:
      return cfl_solve(*cfl_, cost);
    case Family::Toy1D:
      r.solution = Vector::Constant(1, cost(0) < 0.0 ? 1.0 : 0.0);
      break;
    case Family::Generic:
      if (lp_.has_integers()) {
        r = milp_solve(lp_, lp_.sense == Sense::Max ? Vector(-cost) : cost);
      } else {
        r = solve_relaxation(cost);
      }
      break;
  }
  r.objective = cost.dot(r.solution);
  return r;
}

SolveResult Problem::solve_relaxation(const Vector& cost) const {
  if (cost.size() != num_vars()) throw std::invalid_argument("Problem::solve_relaxation: cost length mismatch");
  SolveResult r = simplex_solve(relaxation_, relaxation_.embed_cost(cost));
  if (r.solution.size() > 0) r.solution = r.solution.head(num_vars()).eval();
  if (r.optimal()) r.objective = cost.dot(r.solution);
  return r;
}

bool Problem::is_feasible(const Vector& w, double tol) const {
  if (w.size() != num_vars() || !w.allFinite()) return false;
  if ((w.array() < -tol).any()) return false;
  if (lp_.eq_a.rows() > 0 && (lp_.eq_a * w - lp_.eq_b).lpNorm<Eigen::Infinity>() > tol) return false;
  if (lp_.ineq_c.rows() > 0 && ((lp_.ineq_c * w - lp_.ineq_d).array() > tol).any()) return false;
  for (Index i = 0; i < num_vars(); ++i) {
    if (lp_.has_upper_bound(i) && w(i) > lp_.upper_bounds(i) + tol) return false;
    if (lp_.integer_mask[static_cast<size_t>(i)] && std::abs(w(i) - std::round(w(i))) > tol) return false;
  }
  return true;
}

std::string Problem::name() const {
  switch (family_) {
    case Family::ShortestPath: return "sp" + std::to_string(grid_->k);
    case Family::Knapsack:
      return "knapsack" + std::to_string(knapsack_->num_items()) + "x" + std::to_string(knapsack_->num_dims());
    case Family::TopK: return "top" + std::to_string(topk_->k) + "of" + std::to_string(topk_->m);
    case Family::FacilityLocation:
      return "cfl" + std::to_string(cfl_->num_facilities()) + "x" + std::to_string(cfl_->num_customers());
    case Family::Toy1D: return "toy1d";
    case Family::Generic: return "lp" + std::to_string(num_vars());
  }
  return "unknown";
}

nlohmann::json Problem::to_json() const {
  json j;
  j["family"] = to_string(family_);
  switch (family_) {
    case Family::ShortestPath:
      j["k"] = grid_->k;
      break;
    case Family::Knapsack:
      j["weights"] = matrix_json(knapsack_->weights);
      j["capacities"] = vector_json(knapsack_->capacities);
      break;
    case Family::TopK:
      j["m"] = topk_->m;
      j["k"] = topk_->k;
      break;
    case Family::FacilityLocation:
      j["capacities"] = vector_json(cfl_->capacities);
      j["fixed_costs"] = vector_json(cfl_->fixed_costs);
      j["demands"] = vector_json(cfl_->demands);
      break;
    case Family::Toy1D:
      break;
    case Family::Generic: {
      j["num_vars"] = lp_.num_vars;
      j["sense"] = lp_.sense == Sense::Max ? "max" : "min";
      j["eq_a"] = matrix_json(lp_.eq_a);
      j["eq_b"] = vector_json(lp_.eq_b);
      j["ineq_c"] = matrix_json(lp_.ineq_c);
      j["ineq_d"] = vector_json(lp_.ineq_d);
      json mask = json::array();
      for (bool b : lp_.integer_mask) mask.push_back(b);
      j["integer"] = std::move(mask);
      j["upper_bounds"] = vector_json(lp_.upper_bounds);
      break;
    }
  }
  return j;
}

Problem Problem::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("problem json: expected an object");
  const std::string fam = field(j, "family").get<std::string>();
  if (fam == "shortest_path") return shortest_path(field(j, "k").get<int>());
  if (fam == "knapsack") {
    MultiKnapsack spec;
    spec.capacities = vector_of(field(j, "capacities"), "capacities");
    const json& w = field(j, "weights");
    const Index items = w.is_array() && !w.empty() && w[0].is_array() ? static_cast<Index>(w[0].size()) : 0;
    spec.weights = matrix_of(w, items, "weights");
    return knapsack(std::move(spec));
  }
  if (fam == "topk") return topk(field(j, "m").get<Index>(), j.value("k", Index{1}));
  if (fam == "facility_location") {
    FacilityLocation spec;
    spec.capacities = vector_of(field(j, "capacities"), "capacities");
    spec.fixed_costs = vector_of(field(j, "fixed_costs"), "fixed_costs");
    spec.demands = vector_of(field(j, "demands"), "demands");
    return facility_location(std::move(spec));
  }
  if (fam == "toy1d") return toy1d();
  if (fam == "generic") {
    LinearProgram lp;
    lp.num_vars = field(j, "num_vars").get<Index>();
    const std::string sense = j.value("sense", std::string("min"));
    if (sense != "min" && sense != "max") throw std::invalid_argument("problem json: sense must be 'min' or 'max'");
    lp.sense = sense == "max" ? Sense::Max : Sense::Min;
    lp.eq_a = matrix_of(j.value("eq_a", json::array()), lp.num_vars, "eq_a");
    lp.eq_b = vector_of(j.value("eq_b", json::array()), "eq_b");
    lp.ineq_c = matrix_of(j.value("ineq_c", json::array()), lp.num_vars, "ineq_c");
    lp.ineq_d = vector_of(j.value("ineq_d", json::array()), "ineq_d");
    lp.integer_mask.assign(static_cast<size_t>(lp.num_vars), false);
    if (j.contains("integer")) {
      const json& m = j.at("integer");
      if (!m.is_array() || static_cast<Index>(m.size()) != lp.num_vars) {
        throw std::invalid_argument("problem json: 'integer' must have num_vars entries");
      }
      for (size_t i = 0; i < m.size(); ++i) lp.integer_mask[i] = m[i].get<bool>();
    }
    lp.upper_bounds = j.contains("upper_bounds") ? vector_of(j.at("upper_bounds"), "upper_bounds")
                                                 : Vector::Constant(lp.num_vars, std::numeric_limits<double>::infinity());
    return generic(std::move(lp));
  }
  throw std::invalid_argument("problem json: unknown family '" + fam + "'");
}

}  // namespace dfl
