#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "dfl/log.hpp"
#include "dfl/model.hpp"
#include "oracles.hpp"

using namespace dfl;

namespace {

PtoDataset small_dataset(std::shared_ptr<const Problem> problem, Index n, std::uint64_t seed) {
  DatasetSpec spec;
  spec.n = n;
  spec.p = 3;
  spec.deg = 2;
  spec.seed = seed;
  return generate(spec, std::move(problem));
}

// One instance, one epoch, plain SGD: the update is exactly -lr * dL/dW.
Matrix one_step_gradient(const LinearModel& start, const PtoDataset& one, const LossSpec& loss) {
  TrainConfig cfg;
  cfg.loss = loss;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 1;
  cfg.optimizer = OptimizerKind::SGD;
  cfg.warm_start = false;
  const TrainReport r = train(start, one, cfg);
  return (start.w - r.model.w) / cfg.learning_rate;
}

std::string tmp_path(const std::string& name) {
  const char* dir = std::getenv("DFL_TEST_TMP");
  return std::string(dir != nullptr ? dir : "/tmp") + "/" + name;
}

}  // namespace

TEST_CASE("predict examples") {
  LinearModel id = LinearModel::zeros(2, 2);
  id.w = Matrix::Identity(2, 2);
  CHECK(id.predict(vector_from({1, 2})) == vector_from({1, 2}));
  CHECK(LinearModel::zeros(3, 2).predict(vector_from({5, 6})).isZero(0.0));
  LinearModel m = LinearModel::zeros(2, 1);
  m.w = matrix_from_rows({{3}, {-1}});
  CHECK(m.predict(vector_from({2})) == vector_from({6, -2}));
  m.bias = vector_from({1, 1});
  CHECK(m.predict(vector_from({2})) == vector_from({7, -1}));
  CHECK_THROWS_AS(m.predict(vector_from({1, 2})), std::invalid_argument);
}

TEST_CASE("SGD and Adam first steps") {
  const Matrix g = matrix_from_rows({{0.5, -2.0}});
  LinearModel sgd_model = LinearModel::zeros(1, 2);
  Optimizer sgd(OptimizerKind::SGD, 0.1);
  sgd.step(sgd_model, g, nullptr);
  CHECK((sgd_model.w - matrix_from_rows({{-0.05, 0.2}})).norm() < 1e-15);

  LinearModel adam_model = LinearModel::zeros(1, 2);
  Optimizer adam(OptimizerKind::Adam, 0.005);
  adam.step(adam_model, g, nullptr);
  // Bias-corrected moments equal g and g^2 after one step.
  const Matrix expect = -0.005 * g.array() / (g.array().abs() + 1e-8);
  CHECK((adam_model.w - expect).norm() < 1e-15);
  CHECK(adam.steps() == 1);
}

TEST_CASE("property: training applies the outer-product chain rule") {
  set_log_level(LogLevel::Quiet);
  auto top1 = std::make_shared<const Problem>(Problem::topk(4, 1));
  DysConfig dys;
  dys.rho = 2.0;
  dys.alpha = 0.5;
  dys.max_iters = 1'000'000;
  dys.tol = 1e-13;
  dys.mode = DysMode::ToConvergence;
  CounterRng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const PtoDataset one = small_dataset(top1, 1, static_cast<std::uint64_t>(trial));
    LinearModel start = LinearModel::zeros(4, 3);
    start.w = oracle::random_matrix(rng, 4, 3, -1, 1);
    for (const LossKind kind : {LossKind::MSE, LossKind::SCE_diff}) {
      LossSpec loss;
      loss.kind = kind;
      loss.dys = dys;
      const Vector psi = one.features.row(0).transpose();
      const Vector y = one.costs.row(0).transpose();
      const Vector wstar = one.solutions.row(0).transpose();
      const DysLayer layer(*top1, dys);
      LossContext ctx;
      ctx.problem = top1.get();
      ctx.layer = &layer;
      const auto f = [&](const Vector& flat) {
        const Matrix w = Eigen::Map<const Matrix>(flat.data(), 4, 3);
        return evaluate_loss(loss, ctx, y, w * psi, wstar).value;
      };
      const Vector flat = Eigen::Map<const Vector>(start.w.data(), start.w.size());
      const Vector fd = oracle::central_diff(f, flat, 1e-6);
      const Matrix got = one_step_gradient(start, one, loss);
      const Vector got_flat = Eigen::Map<const Vector>(got.data(), got.size());
      CHECK((got_flat - fd).norm() <= 1e-4 * std::max(1.0, fd.norm()));
    }
  }
  set_log_level(LogLevel::Warning);
}

TEST_CASE("training is deterministic given the seed") {
  auto sp = std::make_shared<const Problem>(Problem::shortest_path(3));
  const PtoDataset data = small_dataset(sp, 12, 7);
  TrainConfig cfg;
  cfg.loss.kind = LossKind::SPOplus;
  cfg.loss.path = GradPath::Subgradient;
  cfg.epochs = 3;
  cfg.seed = 5;
  const LinearModel start = LinearModel::gaussian(sp->pred_dim(), 3, 1);
  const TrainReport a = train(start, data, cfg);
  const TrainReport b = train(start, data, cfg);
  CHECK(a.model.w == b.model.w);
  CHECK(a.epochs.size() == 3);
  cfg.seed = 6;
  CHECK(train(start, data, cfg).model.w != a.model.w);
}

TEST_CASE("MSE training never calls a solver") {
  auto sp = std::make_shared<const Problem>(Problem::shortest_path(3));
  const PtoDataset data = small_dataset(sp, 10, 8);
  TrainConfig cfg;
  cfg.loss.kind = LossKind::MSE;
  cfg.epochs = 2;
  const TrainReport r = train(LinearModel::zeros(sp->pred_dim(), 3), data, cfg);
  CHECK(r.solve_calls == 0);
  for (const EpochRecord& e : r.epochs) CHECK(e.solve_calls == 0);
}

TEST_CASE("non-finite loss aborts with the instance index") {
  auto top1 = std::make_shared<const Problem>(Problem::topk(3, 1));
  PtoDataset data = small_dataset(top1, 4, 9);
  data.features(2, 0) = std::numeric_limits<double>::infinity();
  TrainConfig cfg;
  cfg.loss.kind = LossKind::MSE;
  cfg.epochs = 1;
  CHECK_THROWS_WITH_AS(train(LinearModel::gaussian(3, 3, 2), data, cfg), doctest::Contains("instance 2"),
                       std::runtime_error);
}

TEST_CASE("invalid training configurations are rejected") {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.learning_rate = 0.1;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("models and optimizer state round-trip through JSON files") {
  LinearModel m = LinearModel::gaussian(3, 2, 4, 0.5, true);
  Optimizer opt(OptimizerKind::Adam, 0.01);
  opt.step(m, Matrix::Ones(3, 2), &m.bias.value());
  const std::string path = tmp_path("model_roundtrip.json");
  save_model(path, m, &opt);
  Optimizer back_opt;
  const LinearModel back = load_model(path, &back_opt);
  CHECK(back.w == m.w);
  REQUIRE(back.bias.has_value());
  CHECK(*back.bias == *m.bias);
  CHECK(back_opt.steps() == 1);
  CHECK(back_opt.kind() == OptimizerKind::Adam);

  // Resumed training continues from the same moments.
  LinearModel m1 = m, m2 = back;
  Optimizer o1 = opt, o2 = back_opt;
  o1.step(m1, Matrix::Constant(3, 2, 0.3), nullptr);
  o2.step(m2, Matrix::Constant(3, 2, 0.3), nullptr);
  CHECK(m1.w == m2.w);

  CHECK_THROWS_AS(model_from_json(nlohmann::json{{"format", "other"}}), std::runtime_error);
}
