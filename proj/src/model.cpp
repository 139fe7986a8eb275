#include "dfl/model.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "dfl/dys_layer.hpp"
#include "dfl/problem.hpp"
#include "dfl/rng.hpp"

namespace dfl {
namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  j["data"] = std::move(data);
  return j;
}

Matrix matrix_from_json(const json& j, const char* what) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const json& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
    throw std::runtime_error(std::string("model json: '") + what + "' has inconsistent dimensions");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<size_t>(i * cols + c)].get<double>();
  return m;
}

std::vector<Index> shuffled_order(Index n, std::uint64_t seed, int epoch) {
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  CounterRng rng = CounterRng(seed).substream(0x73687566ULL).substream(static_cast<std::uint64_t>(epoch));  // "shuf"
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.uniform_int(0, i));
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }
  return order;
}

}  // namespace

LinearModel LinearModel::zeros(Index k, Index p, bool with_bias) {
  if (k < 1 || p < 1) throw std::invalid_argument("LinearModel: dimensions must be positive");
  LinearModel m;
  m.w = Matrix::Zero(k, p);
  if (with_bias) m.bias = Vector::Zero(k);
  return m;
}

LinearModel LinearModel::gaussian(Index k, Index p, std::uint64_t seed, double sigma, bool with_bias) {
  LinearModel m = zeros(k, p, with_bias);
  CounterRng rng = CounterRng(seed).substream(0x696e6974ULL);  // "init"
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < p; ++j) m.w(i, j) = sigma * rng.normal();
  return m;
}

Vector LinearModel::predict(const Vector& features) const {
  if (features.size() != w.cols()) {
    throw std::invalid_argument("predict: expected " + std::to_string(w.cols()) + " features, got " +
                                std::to_string(features.size()));
  }
  Vector y = w * features;
  if (bias) y += *bias;
  return y;
}

Matrix LinearModel::predict_all(const Matrix& features) const {
  Matrix out(features.rows(), w.rows());
  for (Index i = 0; i < features.rows(); ++i) out.row(i) = predict(features.row(i).transpose()).transpose();
  return out;
}

std::string to_string(OptimizerKind k) { return k == OptimizerKind::SGD ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::SGD;
  if (s == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected sgd or adam)");
}

Optimizer::Optimizer(OptimizerKind kind, double lr, double beta1, double beta2, double eps)
    : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr > 0.0)) throw std::invalid_argument("Optimizer: learning rate must be positive");
}

void Optimizer::step(LinearModel& model, const Matrix& grad_w, const Vector* grad_bias) {
  if (grad_w.rows() != model.w.rows() || grad_w.cols() != model.w.cols()) {
    throw std::invalid_argument("Optimizer::step: gradient shape differs from W");
  }
  ++t_;
  if (kind_ == OptimizerKind::SGD) {
    model.w -= lr_ * grad_w;
    if (model.bias && grad_bias != nullptr) *model.bias -= lr_ * *grad_bias;
    return;
  }
  if (m_w_.size() == 0) {
    m_w_ = Matrix::Zero(grad_w.rows(), grad_w.cols());
    v_w_ = m_w_;
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  m_w_ = beta1_ * m_w_ + (1.0 - beta1_) * grad_w;
  v_w_ = beta2_ * v_w_ + (1.0 - beta2_) * grad_w.cwiseAbs2();
  model.w.array() -= lr_ * (m_w_.array() / c1) / ((v_w_.array() / c2).sqrt() + eps_);
  if (model.bias && grad_bias != nullptr) {
    if (m_b_.size() == 0) {
      m_b_ = Vector::Zero(grad_bias->size());
      v_b_ = m_b_;
    }
    m_b_ = beta1_ * m_b_ + (1.0 - beta1_) * *grad_bias;
    v_b_ = beta2_ * v_b_ + (1.0 - beta2_) * grad_bias->cwiseAbs2();
    model.bias->array() -= lr_ * (m_b_.array() / c1) / ((v_b_.array() / c2).sqrt() + eps_);
  }
}

nlohmann::json Optimizer::to_json() const {
  json j;
  j["kind"] = to_string(kind_);
  j["lr"] = lr_;
  j["beta1"] = beta1_;
  j["beta2"] = beta2_;
  j["eps"] = eps_;
  j["t"] = t_;
  if (m_w_.size() > 0) {
    j["m_w"] = matrix_to_json(m_w_);
    j["v_w"] = matrix_to_json(v_w_);
  }
  if (m_b_.size() > 0) {
    j["m_b"] = matrix_to_json(m_b_);
    j["v_b"] = matrix_to_json(v_b_);
  }
  return j;
}

Optimizer Optimizer::from_json(const nlohmann::json& j) {
  Optimizer o(optimizer_from_string(j.at("kind").get<std::string>()), j.at("lr").get<double>(),
              j.value("beta1", 0.9), j.value("beta2", 0.999), j.value("eps", 1e-8));
  o.t_ = j.value("t", std::int64_t{0});
  if (j.contains("m_w")) {
    o.m_w_ = matrix_from_json(j.at("m_w"), "m_w");
    o.v_w_ = matrix_from_json(j.at("v_w"), "v_w");
  }
  if (j.contains("m_b")) {
    o.m_b_ = matrix_from_json(j.at("m_b"), "m_b").col(0);
    o.v_b_ = matrix_from_json(j.at("v_b"), "v_b").col(0);
  }
  return o;
}

void TrainConfig::validate() const {
  loss.validate();
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
}

TrainReport train(LinearModel model, const PtoDataset& data, const TrainConfig& cfg, const PtoDataset* validation,
                  EpochCallback callback, void* user, const Optimizer* resume) {
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (!data.problem) throw std::invalid_argument("train: dataset has no problem");
  const Problem& problem = *data.problem;
  if (model.out_dim() != problem.pred_dim() || model.in_dim() != data.features.cols()) {
    throw std::invalid_argument("train: model is " + std::to_string(model.out_dim()) + "x" +
                                std::to_string(model.in_dim()) + ", data needs " + std::to_string(problem.pred_dim()) +
                                "x" + std::to_string(data.features.cols()));
  }

  std::unique_ptr<DysLayer> layer;
  if (cfg.loss.needs_layer()) layer = std::make_unique<DysLayer>(problem, cfg.loss.dys);

  SolutionCache cache;
  CounterRng cache_rng = CounterRng(cfg.seed).substream(0x6361636865ULL);  // "cache"
  if (cfg.loss.kind != LossKind::MSE && cfg.loss.path == GradPath::Subgradient &&
      cfg.loss.solver == SubgradSolver::Cached) {
    cache.solve_probability = cfg.loss.cache_probability;
    for (Index i = 0; i < data.size(); ++i) cache.insert(data.solutions.row(i).transpose());
  }

  std::vector<Vector> warm(static_cast<size_t>(data.size()));
  LossContext ctx;
  ctx.problem = &problem;
  ctx.layer = layer.get();
  ctx.cache = &cache;
  ctx.rng = &cache_rng;

  TrainReport report;
  report.optimizer = resume != nullptr ? *resume : Optimizer(cfg.optimizer, cfg.learning_rate);
  const bool has_bias = model.bias.has_value();
  Matrix grad_w = Matrix::Zero(model.w.rows(), model.w.cols());
  Vector grad_b = Vector::Zero(model.w.rows());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<Index> order = shuffled_order(data.size(), cfg.seed, epoch);
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    int in_batch = 0;
    grad_w.setZero();
    grad_b.setZero();

    for (size_t pos = 0; pos < order.size(); ++pos) {
      const Index i = order[pos];
      const Vector psi = data.features.row(i).transpose();
      const Vector yhat = model.predict(psi);
      ctx.warm_start = cfg.warm_start && layer ? &warm[static_cast<size_t>(i)] : nullptr;
      const LossEval ev = evaluate_loss(cfg.loss, ctx, data.costs.row(i).transpose(), yhat,
                                        data.solutions.row(i).transpose());
      if (!std::isfinite(ev.value) || !ev.grad.allFinite()) {
        throw std::runtime_error("train: non-finite loss or gradient at instance " + std::to_string(i) +
                                 " (epoch " + std::to_string(epoch) + ")");
      }
      rec.solve_calls += ev.solve_calls;
      loss_sum += ev.value;
      grad_w.noalias() += ev.grad * psi.transpose();
      if (has_bias) grad_b += ev.grad;
      ++in_batch;
      if (in_batch == cfg.batch_size || pos + 1 == order.size()) {
        const double inv = 1.0 / in_batch;
        grad_w *= inv;
        grad_b *= inv;
        report.optimizer.step(model, grad_w, has_bias ? &grad_b : nullptr);
        grad_w.setZero();
        grad_b.setZero();
        in_batch = 0;
      }
    }
    rec.train_loss = loss_sum / static_cast<double>(data.size());
    rec.val_regret = validation != nullptr ? evaluate_regret(model, *validation)
                                           : std::numeric_limits<double>::quiet_NaN();
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.solve_calls += rec.solve_calls;
    report.epochs.push_back(rec);
    if (callback != nullptr) callback(rec, model, user);
  }
  report.model = std::move(model);
  return report;
}

double evaluate_regret(const LinearModel& model, const PtoDataset& data) {
  if (!data.problem) throw std::invalid_argument("evaluate_regret: dataset has no problem");
  return normalized_regret(*data.problem, data.costs, model.predict_all(data.features), data.solutions);
}

nlohmann::json model_to_json(const LinearModel& m, const Optimizer* opt) {
  json j;
  j["format"] = "dfl-linear-model v1";
  j["w"] = matrix_to_json(m.w);
  if (m.bias) j["bias"] = matrix_to_json(Matrix(*m.bias));
  if (opt != nullptr) j["optimizer"] = opt->to_json();
  return j;
}

LinearModel model_from_json(const nlohmann::json& j, Optimizer* opt) {
  if (j.value("format", std::string()) != "dfl-linear-model v1") {
    throw std::runtime_error("model json: missing or unsupported 'format'");
  }
  LinearModel m;
  m.w = matrix_from_json(j.at("w"), "w");
  if (j.contains("bias")) m.bias = matrix_from_json(j.at("bias"), "bias").col(0);
  if (!m.w.allFinite()) throw std::runtime_error("model json: non-finite weights");
  if (opt != nullptr && j.contains("optimizer")) *opt = Optimizer::from_json(j.at("optimizer"));
  return m;
}

void save_model(const std::string& path, const LinearModel& m, const Optimizer* opt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << model_to_json(m, opt).dump(1) << '\n';
}

LinearModel load_model(const std::string& path, Optimizer* opt) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open model '" + path + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw std::runtime_error("model '" + path + "': " + e.what());
  }
  return model_from_json(j, opt);
}

}  // namespace dfl
