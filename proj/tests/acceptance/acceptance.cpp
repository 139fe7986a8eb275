// Acceptance suite: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dfl/harness.hpp"
#include "dfl/log.hpp"
#include "dfl/solvers.hpp"
#include "oracles.hpp"

using namespace dfl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string tmp_dir() {
  const char* d = std::getenv("DFL_TEST_TMP");
  return d != nullptr ? d : "/tmp";
}

// ------------------------------------------------------------------ 1
Outcome criterion1() {
  Illustrate1dConfig cfg;  // mu 6, y 4, [-10, 4], 1000 points
  const CsvTable t = cmd_illustrate_1d(cfg);
  double worst_solution = 0.0, worst_flat_grad = 0.0, worst_flat_regret = 0.0;
  double min_sce_grad = oracle::kInf;
  for (const auto& row : t.rows) {
    const double yhat = std::stod(row[0]);
    const double regret_s = std::stod(row[2]);
    const double grad_regret = std::stod(row[5]);
    const double grad_sce = std::stod(row[6]);
    // Piecewise solution: 1 for yhat <= -mu, -yhat/mu in between, 0 for yhat >= 0.
    const double piecewise = yhat <= -6.0 ? 1.0 : (yhat >= 0.0 ? 0.0 : -yhat / 6.0);
    worst_solution = std::max(worst_solution, std::abs(regret_s / cfg.y_true - piecewise));
    if (yhat < -6.0) {
      worst_flat_grad = std::max(worst_flat_grad, std::abs(grad_regret));
      worst_flat_regret = std::max(worst_flat_regret, std::abs(regret_s - 4.0));
    }
    if (yhat < 0.0) min_sce_grad = std::min(min_sce_grad, std::abs(grad_sce));
  }
  Outcome o;
  o.pass = t.rows.size() == 1000 && worst_solution <= 1e-4 && worst_flat_grad <= 1e-8 && worst_flat_regret <= 1e-4 &&
           min_sce_grad > 0.0;
  o.detail = "max|w-piecewise|=" + fmt("%.2e", worst_solution) + " max|grad regret| (yhat<-6)=" +
             fmt("%.2e", worst_flat_grad) + " min|grad sce| (yhat<0)=" + fmt("%.3g", min_sce_grad);
  return o;
}

// ------------------------------------------------------------------ 2
Outcome criterion2() {
  SimulateTop1Config cfg;
  cfg.workers = 1;
  const std::vector<Top1Row> rows = simulate_top1(cfg);
  bool a = true, b = true, c = true, d = true;
  double worst_small = 0.0, worst_oracle = 0.0, worst_spread = 0.0, worst_grad = 0.0;
  std::map<double, std::pair<double, double>> range;  // mu -> (min, max) distance over M
  std::map<Index, std::vector<std::pair<double, double>>> by_m;
  for (const Top1Row& r : rows) {
    if (r.mu < 1.0) {
      worst_small = std::max(worst_small, r.distance);
      if (r.mu <= 0.99 + 1e-12 && r.distance > 1e-3) a = false;
      worst_grad = std::max(worst_grad, r.grad_regret);
      if (r.grad_regret > 1e-8) b = false;
      if (r.trials_with_regret > 0 && !(r.min_grad_sce_when_regret > 0.0)) b = false;
    } else {
      worst_oracle = std::max(worst_oracle, std::abs(r.distance - r.distance_oracle));
      if (std::abs(r.distance - r.distance_oracle) > 1e-4) d = false;
    }
    auto [it, fresh] = range.emplace(r.mu, std::make_pair(r.distance, r.distance));
    if (!fresh) {
      it->second.first = std::min(it->second.first, r.distance);
      it->second.second = std::max(it->second.second, r.distance);
    }
    by_m[r.m].emplace_back(r.mu, r.distance);
  }
  for (const auto& [mu, mm] : range) worst_spread = std::max(worst_spread, mm.second - mm.first);
  if (worst_spread > 1e-3) c = false;
  for (auto& [m, v] : by_m) {
    std::sort(v.begin(), v.end());
    // Rows that are zero in exact arithmetic carry ~1e-9 of DYS residue.
    for (size_t i = 1; i < v.size(); ++i)
      if (v[i].second < v[i - 1].second - 1e-6) c = false;
  }
  Outcome o;
  o.pass = a && b && c && d && rows.size() == 42;
  o.detail = std::string("(a)") + (a ? "ok" : "FAIL") + " (b)" + (b ? "ok" : "FAIL") + " (c)" + (c ? "ok" : "FAIL") +
             " (d)" + (d ? "ok" : "FAIL") + " max dist mu<1=" + fmt("%.2e", worst_small) +
             " max|grad regret|=" + fmt("%.2e", worst_grad) + " spread over M=" + fmt("%.2e", worst_spread) +
             " max|dist-KKT|=" + fmt("%.2e", worst_oracle);
  return o;
}

// ------------------------------------------------------------------ 3
// Best and second-best knapsack values by enumeration.
std::pair<double, double> knapsack_top2(const MultiKnapsack& spec, const Vector& values) {
  const Index n = spec.num_items();
  double best = -oracle::kInf, second = -oracle::kInf;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = (mask >> i) & 1U ? 1.0 : 0.0;
    if (((spec.weights * x - spec.capacities).array() > 1e-9).any()) continue;
    const double v = values.dot(x);
    if (v > best) {
      second = best;
      best = v;
    } else if (v > second) {
      second = v;
    }
  }
  return {best, second};
}

Outcome criterion3() {
  CounterRng rng = CounterRng(2024).substream(3);
  LossSpec sce;
  sce.kind = LossKind::SCE_diff;
  sce.path = GradPath::Subgradient;
  LossSpec spo = sce;
  spo.kind = LossKind::SPOplus;
  int instances = 0, violations = 0, skipped = 0;
  double min_sce = oracle::kInf, min_gap = oracle::kInf;
  while (instances < 1200) {
    const bool knap = instances % 2 == 1;
    const Index m = rng.uniform_int(2, 12);
    const Problem p = knap ? Problem::knapsack(random_knapsack(m, rng.uniform_int(1, 3), rng.next_u64()))
                           : Problem::topk(m, 1);
    const Vector y_pred = oracle::random_vector(rng, m, 0.0, 1.0);
    if (knap) {
      const auto [best, second] = knapsack_top2(p.knapsack_spec(), y_pred);
      if (best - second <= 1e-9) {
        ++skipped;
        continue;
      }
    }
    const Vector yhat_pred = oracle::random_vector(rng, m, 0.0, 1.0);
    const Vector y = p.cost_map().full_cost(y_pred);
    const Vector yhat = p.cost_map().full_cost(yhat_pred);
    const Vector wstar = p.solve(y).solution;
    LossContext ctx;
    ctx.problem = &p;
    const LossEval e = sce_eval(sce, ctx, y, yhat, wstar);
    const double regret = instance_regret(p, y_pred, yhat_pred, wstar);
    const LossEval s = spo_plus_eval(spo, ctx, y, yhat, wstar);
    min_sce = std::min(min_sce, e.value);
    min_gap = std::min(min_gap, s.value - regret);
    if (e.value < -1e-9) ++violations;
    if ((e.value <= 1e-9) != (regret <= 1e-9)) ++violations;
    if (s.value < regret - 1e-9) ++violations;
    ++instances;
  }
  Outcome o;
  o.pass = violations == 0;
  o.detail = std::to_string(instances) + " instances (" + std::to_string(skipped) +
             " tied knapsacks redrawn), violations=" + std::to_string(violations) + " min SCE_diff=" +
             fmt("%.3g", min_sce) + " min(SPO+ - regret)=" + fmt("%.3g", min_gap);
  return o;
}

// ------------------------------------------------------------------ 4
Outcome criterion4() {
  const Problem two = Problem::generic(build_pick_one(2));
  LossContext ctx;
  ctx.problem = &two;
  LossSpec spo;
  spo.kind = LossKind::SPOplus;
  spo.path = GradPath::Subgradient;
  LossSpec sce = spo;
  sce.kind = LossKind::SCE_diff;
  // True values 5 and 10 as min costs; item 2 is the better one.
  const Vector c = vector_from({-5, -10});
  const Vector wstar = vector_from({0, 1});
  int wrong_spo = 0, wrong_sce = 0, cells = 0;
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j <= 200; ++j) {
      // Half-step offset on the second axis keeps every cell off the tie lines.
      const double v1 = 0.1 * i;
      const double v2 = 0.1 * j + 0.05;
      const Vector chat = vector_from({-v1, -v2});
      const bool spo_zero = spo_plus_eval(spo, ctx, c, chat, wstar).grad.isZero(0.0);
      const bool sce_zero = sce_eval(sce, ctx, c, chat, wstar).grad.isZero(0.0);
      wrong_spo += spo_zero != (v2 - v1 >= 2.5) ? 1 : 0;
      wrong_sce += sce_zero != (v2 > v1) ? 1 : 0;
      ++cells;
    }
  }
  Outcome o;
  o.pass = wrong_spo == 0 && wrong_sce == 0 && cells == 201 * 201;
  o.detail = std::to_string(cells) + " cells, misclassified SPO+=" + std::to_string(wrong_spo) +
             " SCE=" + std::to_string(wrong_sce);
  return o;
}

// ------------------------------------------------------------------ 5
LinearProgram random_small_lp(CounterRng& rng) {
  const Index n = rng.uniform_int(2, 10);
  const Index m = rng.uniform_int(1, 5);
  LinearProgram lp;
  lp.num_vars = n;
  lp.sense = Sense::Min;
  if (rng.bernoulli(0.5)) {
    lp.eq_a = oracle::random_matrix(rng, 1, n, 0.2, 1.0);
    lp.eq_b = vector_from({rng.uniform(0.5, 1.0)});
  } else {
    lp.eq_a = Matrix::Zero(0, n);
    lp.eq_b = Vector::Zero(0);
  }
  lp.ineq_c = oracle::random_matrix(rng, m, n, 0.2, 1.0);
  lp.ineq_d = oracle::random_vector(rng, m, 1.0, 3.0);
  lp.integer_mask.assign(static_cast<size_t>(n), false);
  lp.upper_bounds = Vector::Constant(n, oracle::kInf);
  return lp;
}

Outcome criterion5() {
  CounterRng rng = CounterRng(2024).substream(5);
  const LossKind kinds[] = {LossKind::Regret, LossKind::SqDE, LossKind::SPOplus, LossKind::SCE_yhat,
                            LossKind::SCE_diff};
  double worst = 0.0;
  int checks = 0, unstable_lps = 0, max_k = 0;
  for (int lp_i = 0; lp_i < 50; ++lp_i) {
    const Problem p = Problem::generic(random_small_lp(rng));
    max_k = std::max(max_k, static_cast<int>(p.relaxation().num_vars()));
    const double rho = rng.uniform(0.5, 2.0);
    DysConfig dys;
    dys.rho = rho;
    dys.alpha = 1.0 / rho;
    dys.max_iters = 2'000'000;
    dys.tol = 1e-13;
    dys.mode = DysMode::ToConvergence;
    const DysLayer layer(p, dys);
    LossContext ctx;
    ctx.problem = &p;
    ctx.layer = &layer;
    for (const LossKind kind : kinds) {
      LossSpec spec;
      spec.kind = kind;
      spec.path = GradPath::ThroughLayer;
      spec.dys = dys;
      bool done = false;
      for (int attempt = 0; attempt < 20 && !done; ++attempt) {
        const Vector y = oracle::random_vector(rng, p.num_vars(), -1.0, 1.0);
        const Vector yhat = oracle::random_vector(rng, p.num_vars(), -1.0, 1.0);
        const Vector wstar = p.solve(y).solution;
        const auto f = [&](const Vector& x) { return evaluate_loss(spec, ctx, y, x, wstar).value; };
        const Vector fd = oracle::central_diff(f, yhat, 1e-6);
        // A point is stable when halving the stencil leaves the differences
        // unchanged, i.e. no active-set change lies within 2e-6.
        const Vector fd2 = oracle::central_diff(f, yhat, 2e-6);
        if ((fd - fd2).norm() > 1e-7 * std::max(1.0, fd.norm())) continue;
        const Vector g = evaluate_loss(spec, ctx, y, yhat, wstar).grad;
        const double scale = std::max(g.norm(), fd.norm());
        const double rel = scale < 1e-9 ? 0.0 : (g - fd).norm() / scale;
        worst = std::max(worst, rel);
        ++checks;
        done = true;
      }
      if (!done) ++unstable_lps;
    }
  }
  Outcome o;
  o.pass = unstable_lps == 0 && worst <= 1e-3 && max_k <= 20;
  o.detail = std::to_string(checks) + " loss/LP pairs (K<=" + std::to_string(max_k) + "), max rel err=" +
             fmt("%.2e", worst) + ", pairs without a stable point=" + std::to_string(unstable_lps);
  return o;
}

// ------------------------------------------------------------------ 6
// Exhaustive CFL: every open set, every basis of the transportation LP.
double cfl_brute_force(const FacilityLocation& spec, const Vector& cost) {
  const Index nf = spec.num_facilities(), nc = spec.num_customers();
  double best = oracle::kInf;
  for (std::uint64_t open = 1; open < (std::uint64_t{1} << nf); ++open) {
    std::vector<Index> fac;
    double fixed = 0.0;
    for (Index f = 0; f < nf; ++f) {
      if ((open >> f) & 1U) {
        fac.push_back(f);
        fixed += cost(spec.open_var(f));
      }
    }
    const auto k = static_cast<Index>(fac.size());
    // Columns: assignments (c, f in open set), then one slack per open facility.
    const Index cols = nc * k + k;
    Matrix a = Matrix::Zero(nc + k, cols);
    Vector b(nc + k);
    Vector c = Vector::Zero(cols);
    for (Index ci = 0; ci < nc; ++ci) {
      b(ci) = 1.0;
      for (Index j = 0; j < k; ++j) {
        a(ci, ci * k + j) = 1.0;
        a(nc + j, ci * k + j) = spec.demands(ci);
        c(ci * k + j) = cost(spec.assign_var(ci, fac[static_cast<size_t>(j)]));
      }
    }
    for (Index j = 0; j < k; ++j) {
      a(nc + j, nc * k + j) = 1.0;
      b(nc + j) = spec.capacities(fac[static_cast<size_t>(j)]);
    }
    const oracle::Best r = oracle::enumerate_vertices(a, b, c);
    if (r.found) best = std::min(best, fixed + r.value);
  }
  return best;
}

Outcome criterion6() {
  set_log_level(LogLevel::Quiet);
  CounterRng rng = CounterRng(2024).substream(6);
  int sp_bad = 0, kn_bad = 0, cfl_bad = 0, kn_count = 0, cfl_count = 0;
  const Problem sp = Problem::shortest_path(5);
  for (int t = 0; t < 100; ++t) {
    const Vector c = oracle::random_vector(rng, sp.num_vars(), 0.0, 1.0);
    const SolveResult dp = dag_sp_solve(sp.grid(), c);
    const SolveResult lp = simplex_solve(sp.relaxation(), sp.relaxation().embed_cost(c));
    if (!lp.optimal() || std::abs(dp.objective - lp.objective) > 1e-6) ++sp_bad;
  }
  for (Index items = 1; items <= 15; ++items) {
    for (int t = 0; t < 12; ++t) {
      const MultiKnapsack spec = random_knapsack(items, 1 + t % 3, rng.next_u64());
      const Vector v = oracle::random_vector(rng, items, -0.2, 3.0);
      const double bb = knapsack_bb(spec, v).objective;
      if (std::abs(bb - oracle::knapsack_brute_force(spec.weights, spec.capacities, v).value) > 1e-9) ++kn_bad;
      ++kn_count;
    }
  }
  for (int t = 0; t < 40; ++t) {
    const FacilityLocation spec = random_cfl(rng.uniform_int(1, 3), rng.uniform_int(1, 3), rng.next_u64());
    const Problem p = Problem::facility_location(spec);
    const Vector cost = p.cost_map().full_cost(oracle::random_vector(rng, p.pred_dim(), 0.1, 2.0));
    const SolveResult en = cfl_solve(spec, cost);
    if (!en.optimal() || std::abs(en.objective - cfl_brute_force(spec, cost)) > 1e-6) ++cfl_bad;
    ++cfl_count;
  }
  set_log_level(LogLevel::Warning);
  Outcome o;
  o.pass = sp_bad == 0 && kn_bad == 0 && cfl_bad == 0;
  o.detail = "SP mismatches " + std::to_string(sp_bad) + "/100, knapsack " + std::to_string(kn_bad) + "/" +
             std::to_string(kn_count) + " (1..15 items), CFL " + std::to_string(cfl_bad) + "/" +
             std::to_string(cfl_count) + " (<=3 facilities)";
  return o;
}

// ------------------------------------------------------------------ 7
struct BestModel {
  double val = std::numeric_limits<double>::infinity();
  LinearModel model;
};

void keep_best(const EpochRecord& r, const LinearModel& m, void* user) {
  auto* b = static_cast<BestModel*>(user);
  if (r.val_regret < b->val) {
    b->val = r.val_regret;
    b->model = m;
  }
}

Outcome criterion7() {
  set_log_level(LogLevel::Quiet);
  auto sp = std::make_shared<const Problem>(Problem::shortest_path(5));
  const char* names[] = {"MSE", "SPO+/subgradient", "SCE_diff/DYS"};
  double mean[3] = {0, 0, 0};
  const int seeds = 5;
  for (int seed = 0; seed < seeds; ++seed) {
    DatasetSpec spec;  // deg 6, noise 0.5, p 5
    spec.n = 100;
    spec.seed = static_cast<std::uint64_t>(seed);
    const PtoDataset train_set = generate(spec, sp);
    spec.offset = 100;
    const PtoDataset test_set = generate(spec, sp);
    spec.offset = 200;
    const PtoDataset val_set = generate(spec, sp);
    for (int k = 0; k < 3; ++k) {
      TrainConfig cfg;
      cfg.epochs = 30;
      cfg.learning_rate = 0.005;
      cfg.optimizer = OptimizerKind::Adam;
      cfg.seed = static_cast<std::uint64_t>(seed);
      if (k == 0) cfg.loss.kind = LossKind::MSE;
      if (k == 1) {
        cfg.loss.kind = LossKind::SPOplus;
        cfg.loss.path = GradPath::Subgradient;
      }
      if (k == 2) {
        cfg.loss.kind = LossKind::SCE_diff;
        cfg.loss.path = GradPath::ThroughLayer;
        cfg.loss.dys.rho = 1.0;
        cfg.loss.dys.alpha = 1.0;
        cfg.loss.dys.max_iters = 100;
      }
      // Model selection on validation regret, the same rule for every loss.
      BestModel best;
      best.model = LinearModel::zeros(sp->pred_dim(), spec.p, true);
      best.val = evaluate_regret(best.model, val_set);
      train(best.model, train_set, cfg, &val_set, keep_best, &best);
      mean[k] += evaluate_regret(best.model, test_set) / seeds;
    }
  }
  set_log_level(LogLevel::Warning);
  Outcome o;
  o.pass = mean[2] < mean[0] && mean[1] < mean[0] && std::abs(mean[2] - mean[1]) <= 0.05;
  o.detail = "mean normalized test regret:";
  for (int k = 0; k < 3; ++k) o.detail += std::string(" ") + names[k] + "=" + fmt("%.4f", mean[k]);
  return o;
}

// ------------------------------------------------------------------ 8
Outcome criterion8() {
  set_log_level(LogLevel::Quiet);
  bool regret_fixed = true, sce_zero = true;
  double worst_step = 0.0;
  std::string detail;
  for (const std::vector<double>& init : {std::vector<double>{0.1, 0.01}, std::vector<double>{0.01, 0.1}}) {
    KnapsackDemoConfig cfg;
    cfg.init = init;
    cfg.epochs = 500;
    const std::vector<DemoPoint> pts = knapsack_demo(cfg);
    const DemoPoint* prev = nullptr;
    int first_zero = -1;
    double final_regret = NAN;
    for (const DemoPoint& p : pts) {
      if (p.loss == "regret") {
        if (prev != nullptr) {
          const double step = std::hypot(p.yhat1 - prev->yhat1, p.yhat2 - prev->yhat2);
          worst_step = std::max(worst_step, step);
          if (step > 1e-10) regret_fixed = false;
        }
        prev = &p;
      } else {
        if (p.regret == 0.0 && first_zero < 0) first_zero = p.epoch;
        final_regret = p.regret;
      }
    }
    if (first_zero < 0 || final_regret != 0.0) sce_zero = false;
    detail += " init(" + fmt("%g", init[0]) + "," + fmt("%g", init[1]) + "): SCE regret 0 from epoch " +
              std::to_string(first_zero) + ", final " + fmt("%g", final_regret) + ";";
  }
  set_log_level(LogLevel::Warning);
  Outcome o;
  o.pass = regret_fixed && sce_zero;
  o.detail = "max regret-loss step=" + fmt("%.2e", worst_step) + ";" + detail;
  return o;
}

// ------------------------------------------------------------------ 9
std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

Outcome criterion9() {
  const char* cli_env = std::getenv("DFL_CLI");
  Outcome o;
  const std::string dir = tmp_dir();
  if (cli_env == nullptr || *cli_env == '\0') {
    // In-process fallback: compare the CSV text of two runs of each command.
    int same = 0;
    Illustrate1dConfig ill;
    same += cmd_illustrate_1d(ill).str() == cmd_illustrate_1d(ill).str();
    SimulateTop1Config sim;
    sim.m_list = {5, 10};
    sim.trials = 3;
    same += top1_table(sim, simulate_top1(sim)).str() == top1_table(sim, simulate_top1(sim)).str();
    KnapsackDemoConfig demo;
    demo.epochs = 50;
    same += demo_table(demo, knapsack_demo(demo)).str() == demo_table(demo, knapsack_demo(demo)).str();
    o.pass = same == 3;
    o.detail = "in-process (DFL_CLI unset): " + std::to_string(same) + "/3 identical";
    return o;
  }
  const std::string cli = std::string("DFL_WORKERS=1 ") + cli_env + " -q ";
  const std::string base = dir + "/det";
  std::vector<std::string> failures;
  int compared = 0;
  for (int rep = 0; rep < 2; ++rep) {
    const std::string p = base + std::to_string(rep);
    int rc = 0;
    rc |= run(cli + "illustrate-1d -o " + p + "_ill.csv");
    rc |= run(cli + "simulate-top1 --m 5 10 --mu 0.5 2 --trials 3 -o " + p + "_top1.csv");
    rc |= run(cli + "gen-data --grid 3 -n 30 --seed 7 -o " + p + "_train.dataset");
    rc |= run(cli + "gen-data --grid 3 -n 20 --seed 7 --offset 30 -o " + p + "_test.dataset");
    rc |= run(cli + "train --data " + p + "_train.dataset --test " + p +
              "_test.dataset --loss sce_diff --path layer --epochs 3 --seed 3 -o " + p + "_train.csv --metrics " + p +
              "_metrics.csv --model-out " + p + "_model.json");
    rc |= run(cli + "train --data " + p + "_train.dataset --test " + p +
              "_test.dataset --loss spo+ --path subgradient --solver cached --epochs 3 --seed 3 -o " + p +
              "_cached.csv");
    rc |= run(cli + "eval --data " + p + "_test.dataset --model " + p + "_model.json -o " + p + "_eval.csv");
    rc |= run(cli + "knapsack-demo --epochs 50 -o " + p + "_demo.csv");
    if (rc != 0) failures.push_back("a command exited nonzero");
  }
  for (const char* suffix : {"_ill.csv", "_top1.csv", "_train.dataset", "_test.dataset", "_train.csv", "_metrics.csv",
                             "_cached.csv", "_eval.csv", "_demo.csv"}) {
    const std::string a = slurp(base + "0" + suffix);
    const std::string b = slurp(base + "1" + suffix);
    if (a.empty() || a != b) failures.push_back(std::string(suffix + 1) + " differs or is empty");
    ++compared;
  }
  o.pass = failures.empty();
  o.detail = std::to_string(compared) + " outputs compared byte for byte";
  for (const std::string& f : failures) o.detail += "; " + f;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  // --known-deviation N: criterion N still prints FAIL but does not set the
  // exit status. Used for results documented as not reproducible.
  std::vector<int> known;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--known-deviation") known.push_back(std::atoi(argv[++i]));
  struct Criterion {
    int id;
    double limit_seconds;  // 0: no runtime requirement
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> all = {
      {1, 5.0, criterion1},   {2, 120.0, criterion2}, {3, 60.0, criterion3},
      {4, 0.0, criterion4},   {5, 0.0, criterion5},   {6, 0.0, criterion6},
      {7, 600.0, criterion7}, {8, 0.0, criterion8},   {9, 0.0, criterion9},
  };
  int failed = 0, blocking = 0;
  for (const Criterion& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_seconds <= 0.0 || secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    std::string timing = fmt("%.2f s", secs);
    if (c.limit_seconds > 0.0) timing += fmt(" (limit %g s)", c.limit_seconds);
    const bool waived = std::find(known.begin(), known.end(), c.id) != known.end();
    std::printf("criterion %d: %s  %s  [%s]%s\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(), timing.c_str(),
                !pass && waived ? "  (known deviation)" : "");
    std::fflush(stdout);
    failed += pass ? 0 : 1;
    blocking += pass || waived ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed, %d unexpected failure(s)\n", static_cast<int>(all.size()) - failed,
              all.size(), blocking);
  return blocking == 0 ? 0 : 1;
}
