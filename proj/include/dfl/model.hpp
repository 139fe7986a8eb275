#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfl/datagen.hpp"
#include "dfl/linalg.hpp"
#include "dfl/losses.hpp"

namespace dfl {

/// yhat = W psi (+ bias).
struct LinearModel {
  Matrix w;                    // K x p
  std::optional<Vector> bias;  // length K

  static LinearModel zeros(Index k, Index p, bool with_bias = false);
  /// Entries N(0, sigma^2) from the given seed.
  static LinearModel gaussian(Index k, Index p, std::uint64_t seed, double sigma = 0.01, bool with_bias = false);

  Index out_dim() const { return w.rows(); }
  Index in_dim() const { return w.cols(); }
  Vector predict(const Vector& features) const;
  Matrix predict_all(const Matrix& features) const;
};

enum class OptimizerKind { SGD, Adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

/// SGD or Adam over the model parameters (W, then bias).
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Applies one update from the gradients dL/dW and dL/dbias.
  void step(LinearModel& model, const Matrix& grad_w, const Vector* grad_bias);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }
  std::int64_t steps() const { return t_; }

  nlohmann::json to_json() const;
  static Optimizer from_json(const nlohmann::json& j);

 private:
  OptimizerKind kind_ = OptimizerKind::Adam;
  double lr_ = 0.005;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
  Matrix m_w_, v_w_;
  Vector m_b_, v_b_;
};

struct TrainConfig {
  LossSpec loss;
  double learning_rate = 0.005;
  int epochs = 10;
  int batch_size = 1;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint64_t seed = 0;
  /// Reuse each instance's last DYS iterate as the next starting point.
  bool warm_start = true;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  /// NaN when no validation set was given.
  double val_regret = 0.0;
  std::int64_t solve_calls = 0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  LinearModel model;
  Optimizer optimizer;
  std::int64_t solve_calls = 0;
};

/// Called after every epoch with the current model; used by demos that
/// record trajectories.
using EpochCallback = void (*)(const EpochRecord&, const LinearModel&, void* user);

/// Per-instance (or mini-batch) gradient descent on cfg.loss. The instance
/// order is reshuffled each epoch from cfg.seed. Throws std::runtime_error
/// naming the instance on a non-finite loss or gradient.
TrainReport train(LinearModel model, const PtoDataset& data, const TrainConfig& cfg,
                  const PtoDataset* validation = nullptr, EpochCallback callback = nullptr, void* user = nullptr,
                  const Optimizer* resume = nullptr);

/// Normalized regret of the model on a dataset, exact solves only.
double evaluate_regret(const LinearModel& model, const PtoDataset& data);

nlohmann::json model_to_json(const LinearModel& m, const Optimizer* opt = nullptr);
LinearModel model_from_json(const nlohmann::json& j, Optimizer* opt = nullptr);
void save_model(const std::string& path, const LinearModel& m, const Optimizer* opt = nullptr);
LinearModel load_model(const std::string& path, Optimizer* opt = nullptr);

}  // namespace dfl
