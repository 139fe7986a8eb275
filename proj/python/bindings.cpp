#include <memory>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dfl/datagen.hpp"
#include "dfl/dys_layer.hpp"
#include "dfl/harness.hpp"
#include "dfl/log.hpp"
#include "dfl/losses.hpp"
#include "dfl/model.hpp"
#include "dfl/problem.hpp"
#include "dfl/solvers.hpp"

namespace py = pybind11;
using namespace dfl;

namespace {

py::tuple solve_tuple(const SolveResult& r) { return py::make_tuple(r.solution, r.objective, to_string(r.status)); }

LossSpec make_spec(const std::string& loss, const std::string& path, const std::string& solver,
                   const DysConfig& dys) {
  LossSpec s;
  s.kind = loss_kind_from_string(loss);
  s.path = grad_path_from_string(path);
  s.solver = subgrad_solver_from_string(solver);
  s.dys = dys;
  s.validate();
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Decision-focused learning toolkit: solvers, DYS layer, losses and training";

  m.def("set_quiet", [](bool quiet) { set_log_level(quiet ? LogLevel::Quiet : LogLevel::Warning); },
        py::arg("quiet") = true);

  py::class_<Problem, std::shared_ptr<Problem>>(m, "Problem")
      .def_static("shortest_path", &Problem::shortest_path, py::arg("k"))
      .def_static("topk", &Problem::topk, py::arg("m"), py::arg("k") = 1)
      .def_static("toy1d", &Problem::toy1d)
      .def_static(
          "knapsack",
          [](const Matrix& weights, const Vector& capacities) {
            MultiKnapsack spec;
            spec.weights = weights;
            spec.capacities = capacities;
            return Problem::knapsack(spec);
          },
          py::arg("weights"), py::arg("capacities"))
      .def_static(
          "random_knapsack",
          [](Index items, Index dims, std::uint64_t seed) { return Problem::knapsack(random_knapsack(items, dims, seed)); },
          py::arg("items"), py::arg("dims"), py::arg("seed") = 0)
      .def_static(
          "facility_location",
          [](const Vector& capacities, const Vector& fixed_costs, const Vector& demands) {
            FacilityLocation spec;
            spec.capacities = capacities;
            spec.fixed_costs = fixed_costs;
            spec.demands = demands;
            return Problem::facility_location(spec);
          },
          py::arg("capacities"), py::arg("fixed_costs"), py::arg("demands"))
      .def_static("from_json",
                  [](const std::string& text) { return Problem::from_json(nlohmann::json::parse(text)); })
      .def("to_json", [](const Problem& p) { return p.to_json().dump(); })
      .def_property_readonly("name", &Problem::name)
      .def_property_readonly("num_vars", &Problem::num_vars)
      .def_property_readonly("pred_dim", &Problem::pred_dim)
      .def("full_cost", [](const Problem& p, const Vector& pred) { return p.cost_map().full_cost(pred); })
      .def("solve", [](const Problem& p, const Vector& cost) { return solve_tuple(p.solve(cost)); })
      .def("solve_relaxation", [](const Problem& p, const Vector& cost) { return solve_tuple(p.solve_relaxation(cost)); })
      .def("is_feasible", &Problem::is_feasible, py::arg("w"), py::arg("tol") = 1e-7);

  m.def("top1_qp_exact", &top1_qp_exact, py::arg("values"), py::arg("rho"));

  py::class_<DysConfig>(m, "DysConfig")
      .def(py::init([](double rho, double alpha, int max_iters, double tol, const std::string& mode,
                       const std::string& vjp) {
             DysConfig c;
             c.rho = rho;
             c.alpha = alpha;
             c.max_iters = max_iters;
             c.tol = tol;
             c.mode = dys_mode_from_string(mode);
             c.vjp = vjp_mode_from_string(vjp);
             c.validate();
             return c;
           }),
           py::arg("rho") = 1.0, py::arg("alpha") = 1.0, py::arg("max_iters") = 100, py::arg("tol") = 1e-6,
           py::arg("mode") = "fixed-iterations", py::arg("vjp") = "active-set")
      .def_readonly("rho", &DysConfig::rho)
      .def_readonly("alpha", &DysConfig::alpha)
      .def_readonly("max_iters", &DysConfig::max_iters)
      .def_readonly("tol", &DysConfig::tol)
      .def("__repr__", [](const DysConfig& c) { return "DysConfig(" + c.describe() + ")"; });

  py::class_<DysForwardRecord>(m, "DysForwardRecord")
      .def_readonly("output", &DysForwardRecord::output)
      .def_readonly("final_iterate", &DysForwardRecord::final_iterate)
      .def_readonly("residual", &DysForwardRecord::residual)
      .def_readonly("iters_used", &DysForwardRecord::iters_used)
      .def_readonly("converged", &DysForwardRecord::converged);

  py::class_<DysLayer>(m, "DysLayer")
      .def(py::init<const Problem&, DysConfig>(), py::arg("problem"), py::arg("config"))
      .def_property_readonly("num_vars", &DysLayer::num_vars)
      .def_property_readonly("num_original_vars", &DysLayer::num_original_vars)
      .def("embed", &DysLayer::embed)
      .def(
          "forward", [](const DysLayer& l, const Vector& cost) { return dys_forward(l, cost); }, py::arg("cost"))
      .def(
          "vjp", [](const DysLayer& l, const DysForwardRecord& r, const Vector& u) { return dys_vjp(l, r, u); },
          py::arg("record"), py::arg("upstream"));

  m.def(
      "loss",
      [](const Problem& problem, const std::string& loss, const Vector& y, const Vector& yhat, const Vector& wstar,
         const std::string& path, const std::string& solver, const DysConfig& dys) {
        const LossSpec spec = make_spec(loss, path, solver, dys);
        std::unique_ptr<DysLayer> layer;
        if (spec.needs_layer()) layer = std::make_unique<DysLayer>(problem, spec.dys);
        LossContext ctx;
        ctx.problem = &problem;
        ctx.layer = layer.get();
        const LossEval ev = evaluate_loss(spec, ctx, y, yhat, wstar);
        return py::dict(py::arg("value") = ev.value, py::arg("grad") = ev.grad, py::arg("regret") = ev.regret,
                        py::arg("solve_calls") = ev.solve_calls);
      },
      py::arg("problem"), py::arg("loss"), py::arg("y"), py::arg("yhat"), py::arg("wstar"),
      py::arg("path") = "layer", py::arg("solver") = "exact", py::arg("dys") = DysConfig{},
      "Loss value and gradient with respect to the prediction-space vector yhat.");

  m.def("normalized_regret",
        py::overload_cast<const Problem&, const Matrix&, const Matrix&, const Matrix&>(&normalized_regret),
        py::arg("problem"), py::arg("y"), py::arg("yhat"), py::arg("wstar"));

  py::class_<PtoDataset>(m, "Dataset")
      .def_readonly("features", &PtoDataset::features)
      .def_readonly("costs", &PtoDataset::costs)
      .def_readonly("solutions", &PtoDataset::solutions)
      .def_property_readonly("problem", [](const PtoDataset& d) { return std::make_shared<Problem>(*d.problem); })
      .def("__len__", &PtoDataset::size)
      .def("save", [](const PtoDataset& d, const std::string& path) { save_dataset(d, path); });

  m.def(
      "generate",
      [](const Problem& problem, Index n, Index p, int deg, double noise, std::uint64_t seed, Index offset,
         const std::string& b_dist) {
        DatasetSpec spec;
        spec.n = n;
        spec.p = p;
        spec.deg = deg;
        spec.noise = noise;
        spec.seed = seed;
        spec.offset = offset;
        spec.b_dist = b_distribution_from_string(b_dist);
        return generate(spec, std::make_shared<const Problem>(problem));
      },
      py::arg("problem"), py::arg("n") = 100, py::arg("p") = 5, py::arg("deg") = 6, py::arg("noise") = 0.5,
      py::arg("seed") = 0, py::arg("offset") = 0, py::arg("b_dist") = "bernoulli");
  m.def("load_dataset", &load_dataset, py::arg("path"), py::arg("verify_count") = 10);

  py::class_<LinearModel>(m, "LinearModel")
      .def(py::init([](const Matrix& w, std::optional<Vector> bias) {
             LinearModel lm;
             lm.w = w;
             lm.bias = std::move(bias);
             return lm;
           }),
           py::arg("w"), py::arg("bias") = py::none())
      .def_static("zeros", &LinearModel::zeros, py::arg("k"), py::arg("p"), py::arg("bias") = false)
      .def_readwrite("w", &LinearModel::w)
      .def_readwrite("bias", &LinearModel::bias)
      .def("predict", &LinearModel::predict)
      .def("predict_all", &LinearModel::predict_all);

  m.def(
      "train",
      [](const LinearModel& model, const PtoDataset& data, const std::string& loss, const std::string& path,
         const std::string& solver, double cache_p, const DysConfig& dys, double lr, int epochs, int batch_size,
         const std::string& optimizer, std::uint64_t seed, const PtoDataset* validation) {
        TrainConfig cfg;
        cfg.loss = make_spec(loss, path, solver, dys);
        cfg.loss.cache_probability = cache_p;
        cfg.learning_rate = lr;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.optimizer = optimizer_from_string(optimizer);
        cfg.seed = seed;
        TrainReport r;
        {
          py::gil_scoped_release release;
          r = train(model, data, cfg, validation);
        }
        py::list epochs_out;
        for (const EpochRecord& e : r.epochs) {
          epochs_out.append(py::dict(py::arg("epoch") = e.epoch, py::arg("train_loss") = e.train_loss,
                                     py::arg("val_regret") = e.val_regret, py::arg("solve_calls") = e.solve_calls));
        }
        return py::make_tuple(r.model, epochs_out, r.solve_calls);
      },
      py::arg("model"), py::arg("data"), py::arg("loss") = "sce_diff", py::arg("path") = "layer",
      py::arg("solver") = "exact", py::arg("cache_p") = 0.05, py::arg("dys") = DysConfig{}, py::arg("lr") = 0.005,
      py::arg("epochs") = 10, py::arg("batch_size") = 1, py::arg("optimizer") = "adam", py::arg("seed") = 0,
      py::arg("validation") = nullptr, "Returns (model, per-epoch records, solver calls).");
  m.def("evaluate_regret", &evaluate_regret, py::arg("model"), py::arg("data"));

  m.def(
      "illustrate_1d",
      [](double mu, double y_true, double lo, double hi, int points) {
        Illustrate1dConfig c;
        c.mu = mu;
        c.y_true = y_true;
        c.lo = lo;
        c.hi = hi;
        c.points = points;
        return cmd_illustrate_1d(c).str();
      },
      py::arg("mu") = 6.0, py::arg("y_true") = 4.0, py::arg("lo") = -10.0, py::arg("hi") = 4.0,
      py::arg("points") = 1000, "CSV text of the 1-D illustration.");
  m.def(
      "simulate_top1",
      [](std::vector<Index> m_list, std::vector<double> mu_list, int trials, std::uint64_t seed) {
        SimulateTop1Config c;
        c.m_list = std::move(m_list);
        c.mu_list = std::move(mu_list);
        c.trials = trials;
        c.seed = seed;
        py::list out;
        for (const Top1Row& r : simulate_top1(c)) {
          out.append(py::dict(py::arg("m") = r.m, py::arg("mu") = r.mu, py::arg("grad_regret") = r.grad_regret,
                              py::arg("grad_sce") = r.grad_sce, py::arg("distance") = r.distance,
                              py::arg("distance_oracle") = r.distance_oracle, py::arg("regret") = r.regret));
        }
        return out;
      },
      py::arg("m_list") = std::vector<Index>{5, 10, 20, 40, 80, 100},
      py::arg("mu_list") = std::vector<double>{0.1, 0.5, 0.99, 1.05, 1.5, 2.0, 5.0}, py::arg("trials") = 20,
      py::arg("seed") = 0);
  m.def(
      "knapsack_demo",
      [](std::vector<double> init, int epochs) {
        KnapsackDemoConfig c;
        c.init = std::move(init);
        c.epochs = epochs;
        return demo_table(c, knapsack_demo(c)).str();
      },
      py::arg("init") = std::vector<double>{0.01, 0.1}, py::arg("epochs") = 500, "CSV text of both trajectories.");
}
