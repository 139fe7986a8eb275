#include "dfl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dfl/rng.hpp"
#include "dfl/solvers.hpp"

namespace dfl {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json dys_json(const DysConfig& d) {
  return json{{"rho", d.rho},
              {"alpha", d.alpha},
              {"max_iters", d.max_iters},
              {"tol", d.tol},
              {"mode", to_string(d.mode)},
              {"vjp", to_string(d.vjp)}};
}

json loss_json(const LossSpec& s) {
  json j{{"kind", to_string(s.kind)}, {"path", to_string(s.path)}};
  if (s.kind != LossKind::MSE && s.path == GradPath::Subgradient) {
    j["solver"] = to_string(s.solver);
    if (s.solver == SubgradSolver::Cached) j["cache_probability"] = s.cache_probability;
  }
  if (s.needs_layer()) j["dys"] = dys_json(s.dys);
  return j;
}

json spec_json(const DatasetSpec& s) {
  return json{{"n", s.n},           {"p", s.p},       {"deg", s.deg},
              {"noise", s.noise},   {"seed", s.seed}, {"b_dist", to_string(s.b_dist)},
              {"offset", s.offset}};
}

std::vector<Index> permutation(Index m, CounterRng& rng) {
  std::vector<Index> v(static_cast<size_t>(m));
  std::iota(v.begin(), v.end(), Index{1});
  for (Index i = m - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.uniform_int(0, i));
    std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
  }
  return v;
}

Vector to_vector(const std::vector<Index>& v) {
  Vector out(static_cast<Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = static_cast<double>(v[i]);
  return out;
}

}  // namespace

int worker_count() {
  const char* env = std::getenv("DFL_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0') throw std::invalid_argument("DFL_WORKERS must be an integer, got '" + std::string(env) + "'");
  return static_cast<int>(std::clamp(v, 1L, 256L));
}

void parallel_for(int n, int workers, const std::function<void(int)>& task) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::mutex mu;
  std::exception_ptr first;
  int next = 0;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        int i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= n || first) return;
          i = next++;
        }
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string CsvTable::str() const {
  std::ostringstream os;
  os << "# config=" << config.dump() << '\n';
  for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------- 1-D

json Illustrate1dConfig::to_json() const {
  return json{{"command", "illustrate-1d"}, {"mu", mu},         {"y_true", y_true}, {"lo", lo},
              {"hi", hi},                   {"points", points}, {"alpha", alpha},   {"max_iters", max_iters},
              {"tol", tol}};
}

double toy_smoothed_solution(double y, double mu) { return std::clamp(-y / mu, 0.0, 1.0); }

CsvTable cmd_illustrate_1d(const Illustrate1dConfig& cfg) {
  if (!(cfg.mu > 0.0)) throw std::invalid_argument("illustrate-1d: mu must be positive");
  if (cfg.points < 2 || !(cfg.hi > cfg.lo)) throw std::invalid_argument("illustrate-1d: need points >= 2 and hi > lo");
  const Problem problem = Problem::toy1d();
  LossSpec spec;
  spec.path = GradPath::ThroughLayer;
  spec.dys.rho = cfg.mu;
  spec.dys.alpha = cfg.alpha > 0.0 ? cfg.alpha : 1.0 / cfg.mu;
  spec.dys.max_iters = cfg.max_iters;
  spec.dys.tol = cfg.tol;
  spec.dys.mode = DysMode::ToConvergence;
  const DysLayer layer(problem, spec.dys);

  LossContext ctx;
  ctx.problem = &problem;
  ctx.layer = &layer;

  const Vector y = Vector::Constant(1, cfg.y_true);
  const Vector wstar = problem.solve(y).solution;
  LossSpec sub = spec;
  sub.path = GradPath::Subgradient;

  CsvTable t;
  t.config = cfg.to_json();
  t.header = {"yhat",         "regret_unsmoothed",   "regret_smoothed", "sce_unsmoothed",
              "sce_smoothed", "grad_regret_smoothed", "grad_sce_smoothed"};
  for (int i = 0; i < cfg.points; ++i) {
    const double yh = cfg.lo + (cfg.hi - cfg.lo) * static_cast<double>(i) / (cfg.points - 1);
    const Vector yhat = Vector::Constant(1, yh);
    spec.kind = LossKind::Regret;
    const LossEval reg = regret_eval(spec, ctx, y, yhat, wstar);
    spec.kind = LossKind::SCE_diff;
    const LossEval sce = sce_eval(spec, ctx, y, yhat, wstar);
    sub.kind = LossKind::SCE_diff;
    const LossEval sce_exact = sce_eval(sub, ctx, y, yhat, wstar);
    const double regret_exact = y.dot(problem.solve(yhat).solution - wstar);
    t.rows.push_back({csv_num(yh), csv_num(regret_exact), csv_num(reg.value), csv_num(sce_exact.value),
                      csv_num(sce.value), csv_num(reg.grad(0)), csv_num(sce.grad(0))});
  }
  return t;
}

// ------------------------------------------------------------ top-1

json SimulateTop1Config::to_json() const {
  return json{{"command", "simulate-top1"}, {"m", m_list},         {"mu", mu_list}, {"trials", trials},
              {"seed", seed},               {"max_iters", max_iters}, {"tol", tol}};
}

std::vector<Top1Row> simulate_top1(const SimulateTop1Config& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("simulate-top1: trials must be >= 1");
  for (Index m : cfg.m_list)
    if (m < 2) throw std::invalid_argument("simulate-top1: every M must be >= 2");
  for (double mu : cfg.mu_list)
    if (!(mu > 0.0)) throw std::invalid_argument("simulate-top1: every mu must be positive");

  struct Cell {
    double grad_regret, grad_sce, distance, distance_oracle, regret, oracle_gap;
  };
  const auto n_m = static_cast<int>(cfg.m_list.size());
  const auto n_mu = cfg.mu_list.size();
  std::vector<std::vector<Cell>> cells(static_cast<size_t>(n_m * cfg.trials), std::vector<Cell>(n_mu));

  parallel_for(n_m * cfg.trials, cfg.workers, [&](int task) {
    const Index m = cfg.m_list[static_cast<size_t>(task / cfg.trials)];
    const int trial = task % cfg.trials;
    CounterRng rng = CounterRng(cfg.seed).substream(static_cast<std::uint64_t>(m)).substream(
        static_cast<std::uint64_t>(trial));
    const Vector y = to_vector(permutation(m, rng));
    const Vector yhat = to_vector(permutation(m, rng));
    const Problem problem = Problem::topk(m, 1);
    const Vector wstar = topk_solve(m, 1, y).solution;
    const Vector w_lp = topk_solve(m, 1, yhat).solution;

    for (size_t k = 0; k < n_mu; ++k) {
      const double mu = cfg.mu_list[k];
      LossSpec spec;
      spec.path = GradPath::ThroughLayer;
      spec.dys.rho = mu;
      spec.dys.alpha = 1.0 / mu;
      spec.dys.max_iters = cfg.max_iters;
      spec.dys.tol = cfg.tol;
      spec.dys.mode = DysMode::ToConvergence;
      const DysLayer layer(problem, spec.dys);
      LossContext ctx;
      ctx.problem = &problem;
      ctx.layer = &layer;

      spec.kind = LossKind::Regret;
      const LossEval reg = evaluate_loss(spec, ctx, y, yhat, wstar);
      spec.kind = LossKind::SCE_diff;
      const LossEval sce = evaluate_loss(spec, ctx, y, yhat, wstar);

      const DysForwardRecord rec = dys_forward(layer, layer.embed(-yhat));
      const Vector smooth = rec.output.head(m);
      const Vector oracle = top1_qp_exact(yhat, mu);
      Cell& c = cells[static_cast<size_t>(task)][k];
      c.grad_regret = reg.grad.cwiseAbs().mean();
      c.grad_sce = sce.grad.cwiseAbs().mean();
      c.distance = (smooth - w_lp).lpNorm<1>();
      c.distance_oracle = (oracle - w_lp).lpNorm<1>();
      c.regret = reg.value;
      c.oracle_gap = (smooth - oracle).lpNorm<Eigen::Infinity>();
    }
  });

  std::vector<Top1Row> rows;
  for (int mi = 0; mi < n_m; ++mi) {
    for (size_t k = 0; k < n_mu; ++k) {
      Top1Row r;
      r.m = cfg.m_list[static_cast<size_t>(mi)];
      r.mu = cfg.mu_list[k];
      r.min_grad_sce_when_regret = kNaN;
      for (int t = 0; t < cfg.trials; ++t) {
        const Cell& c = cells[static_cast<size_t>(mi * cfg.trials + t)][k];
        r.grad_regret += c.grad_regret;
        r.grad_sce += c.grad_sce;
        r.distance += c.distance;
        r.distance_oracle += c.distance_oracle;
        r.regret += c.regret;
        r.max_layer_oracle_gap = std::max(r.max_layer_oracle_gap, c.oracle_gap);
        if (c.regret > 1e-9) {
          ++r.trials_with_regret;
          r.min_grad_sce_when_regret = std::isnan(r.min_grad_sce_when_regret)
                                           ? c.grad_sce
                                           : std::min(r.min_grad_sce_when_regret, c.grad_sce);
        }
      }
      const double inv = 1.0 / cfg.trials;
      r.grad_regret *= inv;
      r.grad_sce *= inv;
      r.distance *= inv;
      r.distance_oracle *= inv;
      r.regret *= inv;
      rows.push_back(r);
    }
  }
  return rows;
}

CsvTable top1_table(const SimulateTop1Config& cfg, const std::vector<Top1Row>& rows) {
  CsvTable t;
  t.config = cfg.to_json();
  t.header = {"m",        "mu",     "grad_regret",        "grad_sce", "distance", "distance_oracle",
              "regret",   "trials_with_regret", "min_grad_sce_when_regret", "max_layer_oracle_gap"};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.m), csv_num(r.mu), csv_num(r.grad_regret), csv_num(r.grad_sce),
                      csv_num(r.distance), csv_num(r.distance_oracle), csv_num(r.regret),
                      std::to_string(r.trials_with_regret), csv_num(r.min_grad_sce_when_regret),
                      csv_num(r.max_layer_oracle_gap)});
  }
  return t;
}

// ---------------------------------------------------------- gen-data

json GenDataConfig::to_json() const {
  json j{{"problem", problem}, {"data", spec_json(data)}};
  if (problem == "sp") j["grid"] = grid;
  if (problem == "knapsack") {
    j["items"] = items;
    j["dims"] = dims;
    j["instance_seed"] = instance_seed;
  }
  if (problem == "topk") {
    j["m"] = topk_m;
    j["k"] = topk_k;
  }
  if (problem == "cfl") {
    j["facilities"] = facilities;
    j["customers"] = customers;
    j["instance_seed"] = instance_seed;
  }
  return j;
}

std::shared_ptr<const Problem> make_problem(const GenDataConfig& cfg) {
  if (cfg.problem == "sp") return std::make_shared<const Problem>(Problem::shortest_path(cfg.grid));
  if (cfg.problem == "knapsack") {
    return std::make_shared<const Problem>(Problem::knapsack(random_knapsack(cfg.items, cfg.dims, cfg.instance_seed)));
  }
  if (cfg.problem == "topk") return std::make_shared<const Problem>(Problem::topk(cfg.topk_m, cfg.topk_k));
  if (cfg.problem == "cfl") {
    return std::make_shared<const Problem>(
        Problem::facility_location(random_cfl(cfg.facilities, cfg.customers, cfg.instance_seed)));
  }
  std::ifstream is(cfg.problem);
  if (!is) {
    throw std::invalid_argument("problem must be sp, knapsack, topk, cfl or a readable JSON file, got '" +
                                cfg.problem + "'");
  }
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw std::invalid_argument("problem file '" + cfg.problem + "': " + e.what());
  }
  return std::make_shared<const Problem>(Problem::from_json(j));
}

// ------------------------------------------------------------- train

json TrainCommandConfig::to_json() const {
  return json{{"loss", loss_json(train.loss)},
              {"learning_rate", train.learning_rate},
              {"epochs", train.epochs},
              {"batch_size", train.batch_size},
              {"optimizer", to_string(train.optimizer)},
              {"seed", train.seed},
              {"warm_start", train.warm_start},
              {"bias", bias},
              {"init", init}};
}

TrainOutcome run_training(const TrainCommandConfig& cfg, const PtoDataset& train_set, const PtoDataset* val_set,
                          const PtoDataset& test_set) {
  const Problem& problem = *train_set.problem;
  const Index k = problem.pred_dim();
  const Index p = train_set.features.cols();
  LinearModel model;
  if (cfg.init == "zeros") {
    model = LinearModel::zeros(k, p, cfg.bias);
  } else if (cfg.init == "gaussian") {
    model = LinearModel::gaussian(k, p, cfg.train.seed, 0.01, cfg.bias);
  } else {
    throw std::invalid_argument("init must be zeros or gaussian, got '" + cfg.init + "'");
  }

  TrainOutcome out;
  out.report = train(std::move(model), train_set, cfg.train, val_set);
  out.test_regret = evaluate_regret(out.report.model, test_set);

  json config = cfg.to_json();
  config["command"] = "train";
  config["problem"] = problem.name();
  config["train_data"] = spec_json(train_set.spec);
  config["test_data"] = spec_json(test_set.spec);
  if (val_set != nullptr) config["val_data"] = spec_json(val_set->spec);

  out.epochs.config = config;
  out.epochs.header = {"epoch", "train_loss", "val_regret", "solve_calls"};
  out.timing.config = config;
  out.timing.header = {"epoch", "seconds"};
  double total_seconds = 0.0;
  for (const auto& e : out.report.epochs) {
    out.epochs.rows.push_back(
        {std::to_string(e.epoch), csv_num(e.train_loss), csv_num(e.val_regret), std::to_string(e.solve_calls)});
    out.timing.rows.push_back({std::to_string(e.epoch), csv_num(e.seconds)});
    total_seconds += e.seconds;
  }
  out.timing.rows.push_back({"mean", csv_num(total_seconds / static_cast<double>(out.report.epochs.size()))});

  out.metrics.config = config;
  out.metrics.header = {"loss", "path", "problem", "seed", "regret", "solve_calls"};
  const LossSpec& ls = cfg.train.loss;
  std::string path = ls.kind == LossKind::MSE ? "none" : to_string(ls.path);
  if (ls.kind != LossKind::MSE && ls.path == GradPath::Subgradient) path += ":" + to_string(ls.solver);
  out.metrics.rows.push_back({to_string(ls.kind), path, problem.name(), std::to_string(cfg.train.seed),
                              csv_num(out.test_regret), std::to_string(out.report.solve_calls)});
  return out;
}

CsvTable cmd_eval(const LinearModel& model, const PtoDataset& data, const nlohmann::json& config) {
  CsvTable t;
  t.config = config;
  t.header = {"problem", "instances", "regret"};
  t.rows.push_back({data.problem->name(), std::to_string(data.size()), csv_num(evaluate_regret(model, data))});
  return t;
}

// ---------------------------------------------------- knapsack demo

json KnapsackDemoConfig::to_json() const {
  return json{{"command", "knapsack-demo"}, {"true_values", true_values},
              {"init", init},               {"rho", rho},
              {"alpha", alpha},             {"max_iters", max_iters},
              {"tol", tol},                 {"epochs", epochs},
              {"learning_rate", learning_rate}, {"optimizer", to_string(optimizer)}};
}

std::vector<DemoPoint> knapsack_demo(const KnapsackDemoConfig& cfg) {
  if (cfg.true_values.size() != 2 || cfg.init.size() != 2) {
    throw std::invalid_argument("knapsack-demo: true_values and init must have two entries");
  }
  auto problem = std::make_shared<const Problem>(Problem::topk(2, 1));
  PtoDataset data;
  data.spec.n = 1;
  data.spec.p = 1;
  data.problem = problem;
  data.features = Matrix::Ones(1, 1);
  data.costs = Vector::Map(cfg.true_values.data(), 2).transpose();
  data.solutions = problem->solve(problem->cost_map().full_cost(data.costs.row(0).transpose())).solution.transpose();

  std::vector<DemoPoint> out;
  const LossKind kinds[] = {LossKind::Regret, LossKind::SCE_diff};
  for (LossKind kind : kinds) {
    TrainConfig tc;
    tc.loss.kind = kind;
    tc.loss.path = GradPath::ThroughLayer;
    tc.loss.dys.rho = cfg.rho;
    tc.loss.dys.alpha = cfg.alpha > 0.0 ? cfg.alpha : 1.0 / cfg.rho;
    tc.loss.dys.max_iters = cfg.max_iters;
    tc.loss.dys.tol = cfg.tol;
    tc.loss.dys.mode = DysMode::ToConvergence;
    tc.learning_rate = cfg.learning_rate;
    tc.epochs = cfg.epochs;
    tc.optimizer = cfg.optimizer;
    tc.warm_start = false;

    LinearModel model = LinearModel::zeros(2, 1);
    model.w(0, 0) = cfg.init[0];
    model.w(1, 0) = cfg.init[1];

    struct Ctx {
      std::vector<DemoPoint>* out;
      const PtoDataset* data;
      std::string name;
    } ctx{&out, &data, to_string(kind)};
    auto record = [](const EpochRecord& e, const LinearModel& m, void* user) {
      auto* c = static_cast<Ctx*>(user);
      DemoPoint pt;
      pt.loss = c->name;
      pt.epoch = e.epoch;
      pt.yhat1 = m.w(0, 0);
      pt.yhat2 = m.w(1, 0);
      pt.loss_value = e.train_loss;
      pt.regret = instance_regret(*c->data->problem, c->data->costs.row(0).transpose(), m.w.col(0),
                                  c->data->solutions.row(0).transpose());
      c->out->push_back(pt);
    };
    DemoPoint start;
    start.loss = ctx.name;
    start.yhat1 = cfg.init[0];
    start.yhat2 = cfg.init[1];
    start.loss_value = kNaN;
    start.regret = instance_regret(*problem, data.costs.row(0).transpose(), model.w.col(0),
                                   data.solutions.row(0).transpose());
    out.push_back(start);
    train(model, data, tc, nullptr, +record, &ctx);
  }
  return out;
}

CsvTable demo_table(const KnapsackDemoConfig& cfg, const std::vector<DemoPoint>& pts) {
  CsvTable t;
  t.config = cfg.to_json();
  t.header = {"loss", "epoch", "yhat1", "yhat2", "loss_value", "regret"};
  for (const auto& p : pts) {
    t.rows.push_back({p.loss, std::to_string(p.epoch), csv_num(p.yhat1), csv_num(p.yhat2), csv_num(p.loss_value),
                      csv_num(p.regret)});
  }
  return t;
}

}  // namespace dfl
