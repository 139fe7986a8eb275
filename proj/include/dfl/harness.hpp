#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfl/datagen.hpp"
#include "dfl/dys_layer.hpp"
#include "dfl/losses.hpp"
#include "dfl/model.hpp"
#include "dfl/problem.hpp"

namespace dfl {

/// Worker count from DFL_WORKERS (default 1, clamped to [1, 256]).
int worker_count();

/// Runs task(i) for i in [0, n) on up to `workers` threads. Tasks must write
/// only to their own slot; the first exception is rethrown after all joins.
void parallel_for(int n, int workers, const std::function<void(int)>& task);

/// Fixed "%.12g" formatting used by every CSV writer.
std::string csv_num(double v);

/// A CSV table whose first line is "# config=<compact json>".
struct CsvTable {
  nlohmann::json config;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const;
};

void write_text(const std::string& path, const std::string& text);

// ---------------------------------------------------------------- 1-D

struct Illustrate1dConfig {
  double mu = 6.0;
  double y_true = 4.0;
  double lo = -10.0;
  double hi = 4.0;
  int points = 1000;
  /// 0 picks 1 / mu.
  double alpha = 0.0;
  int max_iters = 200000;
  double tol = 1e-12;

  nlohmann::json to_json() const;
};

/// yhat, regret_unsmoothed, regret_smoothed, sce_unsmoothed, sce_smoothed,
/// grad_regret_smoothed, grad_sce_smoothed on an even grid of yhat.
CsvTable cmd_illustrate_1d(const Illustrate1dConfig& cfg);

/// Closed-form smoothed solution of min y w + (mu/2) w^2 over [0, 1].
double toy_smoothed_solution(double y, double mu);

// ------------------------------------------------------------ top-1

struct SimulateTop1Config {
  std::vector<Index> m_list{5, 10, 20, 40, 80, 100};
  std::vector<double> mu_list{0.1, 0.5, 0.99, 1.05, 1.5, 2.0, 5.0};
  int trials = 20;
  std::uint64_t seed = 0;
  int max_iters = 200000;
  double tol = 1e-10;
  int workers = 1;

  nlohmann::json to_json() const;
};

struct Top1Row {
  Index m = 0;
  double mu = 0.0;
  double grad_regret = 0.0;  // mean over trials of mean |d regret / d yhat|
  double grad_sce = 0.0;
  double distance = 0.0;         // mean L1(LP solution, layer output)
  double distance_oracle = 0.0;  // same with the closed-form smoothed solution
  double regret = 0.0;           // mean smoothed regret
  int trials_with_regret = 0;
  /// Smallest mean |d SCE / d yhat| among trials with positive regret
  /// (NaN if none).
  double min_grad_sce_when_regret = 0.0;
  double max_layer_oracle_gap = 0.0;  // max |layer output - closed form|
};

/// Permutation pairs of {1..M} per (M, trial), drawn from
/// CounterRng(seed).substream(M).substream(trial).
std::vector<Top1Row> simulate_top1(const SimulateTop1Config& cfg);
CsvTable top1_table(const SimulateTop1Config& cfg, const std::vector<Top1Row>& rows);

// ---------------------------------------------------------- gen-data

struct GenDataConfig {
  /// "sp", "knapsack", "topk", "cfl" or a path to a problem JSON file.
  std::string problem = "sp";
  int grid = 5;
  Index items = 20;
  Index dims = 2;
  Index topk_m = 10;
  Index topk_k = 1;
  Index facilities = 5;
  Index customers = 20;
  /// Seed for random knapsack / CFL instance structure.
  std::uint64_t instance_seed = 0;
  DatasetSpec data;

  nlohmann::json to_json() const;
};

std::shared_ptr<const Problem> make_problem(const GenDataConfig& cfg);

// ------------------------------------------------------------- train

struct TrainCommandConfig {
  TrainConfig train;
  bool bias = false;
  /// "zeros" or "gaussian".
  std::string init = "zeros";

  nlohmann::json to_json() const;
};

struct TrainOutcome {
  TrainReport report;
  CsvTable epochs;      // epoch, train_loss, val_regret, solve_calls
  CsvTable timing;      // epoch, seconds
  CsvTable metrics;     // loss, path, problem, seed, regret, solve_calls
  double test_regret = 0.0;
};

/// Trains on `train_set`, tracks validation regret when given, and reports
/// normalized regret on `test_set` with exact solves.
TrainOutcome run_training(const TrainCommandConfig& cfg, const PtoDataset& train_set, const PtoDataset* val_set,
                          const PtoDataset& test_set);

/// Metrics of a stored model on a dataset.
CsvTable cmd_eval(const LinearModel& model, const PtoDataset& data, const nlohmann::json& config);

// ---------------------------------------------------- knapsack demo

struct KnapsackDemoConfig {
  std::vector<double> true_values{0.8, 0.4};
  std::vector<double> init{0.01, 0.1};
  double rho = 0.05;
  /// 0 picks 1 / rho.
  double alpha = 0.0;
  int max_iters = 100000;
  double tol = 1e-12;
  int epochs = 500;
  double learning_rate = 0.005;
  OptimizerKind optimizer = OptimizerKind::SGD;

  nlohmann::json to_json() const;
};

struct DemoPoint {
  std::string loss;
  int epoch = 0;
  double yhat1 = 0.0, yhat2 = 0.0;
  double loss_value = 0.0;
  double regret = 0.0;  // exact regret of the prediction
};

/// Two-item fractional knapsack with room for one item; the model is the
/// prediction itself (a single constant feature). Epoch 0 is the start.
std::vector<DemoPoint> knapsack_demo(const KnapsackDemoConfig& cfg);
CsvTable demo_table(const KnapsackDemoConfig& cfg, const std::vector<DemoPoint>& pts);

}  // namespace dfl
