// dfl: command-line driver for the decision-focused learning toolkit.

#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dfl/datagen.hpp"
#include "dfl/harness.hpp"
#include "dfl/log.hpp"
#include "dfl/model.hpp"

namespace {

using namespace dfl;

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    write_text(path, text);
  }
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

int fail(const std::string& code, const std::string& message, int exit_code) {
  std::fprintf(stderr, "error: code=%s message=\"%s\"\n", code.c_str(), escape(message).c_str());
  return exit_code;
}

struct TrainOptions {
  std::string data, val, test, out, metrics, model_out, timing;
  std::string loss = "sce_diff", path = "layer", solver = "exact", dys_mode = "fixed-iterations",
              vjp = "active-set", optimizer = "adam", init = "zeros";
  double cache_p = 0.05, rho = 1.0, alpha = 1.0, dys_tol = 1e-6, lr = 0.005;
  int dys_iters = 100, epochs = 10, batch = 1;
  std::uint64_t seed = 0;
  bool no_warm_start = false, bias = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-focused learning toolkit: experiments on smoothed LP layers and surrogate losses", "dfl"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; flags override file values, file values override defaults");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress the resolved-config banner and warnings");

  // illustrate-1d
  Illustrate1dConfig ill;
  std::string ill_out;
  auto* c_ill = app.add_subcommand("illustrate-1d", "Smoothed vs unsmoothed regret and SCE on min y*w, 0<=w<=1");
  c_ill->add_option("--mu", ill.mu, "Smoothing strength")->capture_default_str();
  c_ill->add_option("--y-true", ill.y_true, "True cost")->capture_default_str();
  c_ill->add_option("--lo", ill.lo, "Smallest predicted cost")->capture_default_str();
  c_ill->add_option("--hi", ill.hi, "Largest predicted cost")->capture_default_str();
  c_ill->add_option("--points", ill.points, "Grid points")->capture_default_str();
  c_ill->add_option("--alpha", ill.alpha, "DYS step size (0: 1/mu)")->capture_default_str();
  c_ill->add_option("--max-iters", ill.max_iters, "DYS iteration cap")->capture_default_str();
  c_ill->add_option("--tol", ill.tol, "DYS residual tolerance")->capture_default_str();
  c_ill->add_option("-o,--out", ill_out, "Output CSV (default stdout)");

  // simulate-top1
  SimulateTop1Config sim;
  std::string sim_out;
  auto* c_sim = app.add_subcommand("simulate-top1", "Gradient and distance statistics on random Top-1 problems");
  c_sim->add_option("--m", sim.m_list, "Item counts")->capture_default_str();
  c_sim->add_option("--mu", sim.mu_list, "Smoothing strengths")->capture_default_str();
  c_sim->add_option("--trials", sim.trials, "Trials per (M, mu)")->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Seed")->capture_default_str();
  c_sim->add_option("--max-iters", sim.max_iters, "DYS iteration cap")->capture_default_str();
  c_sim->add_option("--tol", sim.tol, "DYS residual tolerance")->capture_default_str();
  c_sim->add_option("-o,--out", sim_out, "Output CSV (default stdout)");

  // gen-data
  GenDataConfig gen;
  std::string gen_out, b_dist = "bernoulli";
  auto* c_gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  c_gen->add_option("--problem", gen.problem, "sp | knapsack | topk | cfl | path to a problem JSON file")
      ->capture_default_str();
  c_gen->add_option("--grid", gen.grid, "Shortest-path grid side")->capture_default_str();
  c_gen->add_option("--items", gen.items, "Knapsack items")->capture_default_str();
  c_gen->add_option("--dims", gen.dims, "Knapsack capacity dimensions")->capture_default_str();
  c_gen->add_option("--topk-m", gen.topk_m, "Top-K item count")->capture_default_str();
  c_gen->add_option("--topk-k", gen.topk_k, "Top-K capacity")->capture_default_str();
  c_gen->add_option("--facilities", gen.facilities, "CFL facilities")->capture_default_str();
  c_gen->add_option("--customers", gen.customers, "CFL customers")->capture_default_str();
  c_gen->add_option("--instance-seed", gen.instance_seed, "Seed for random instance structure")->capture_default_str();
  c_gen->add_option("-n,--n", gen.data.n, "Instances")->capture_default_str();
  c_gen->add_option("-p,--p", gen.data.p, "Feature dimension")->capture_default_str();
  c_gen->add_option("--deg", gen.data.deg, "Polynomial degree")->capture_default_str();
  c_gen->add_option("--noise", gen.data.noise, "Noise half-width")->capture_default_str();
  c_gen->add_option("--seed", gen.data.seed, "Seed")->capture_default_str();
  c_gen->add_option("--b-dist", b_dist, "bernoulli | gaussian")->capture_default_str();
  c_gen->add_option("--offset", gen.data.offset, "Index of the first instance")->capture_default_str();
  c_gen->add_option("-o,--out", gen_out, "Output dataset file")->required();

  // train
  TrainOptions tr;
  auto* c_tr = app.add_subcommand("train", "Train a linear model and report test regret");
  c_tr->add_option("--data", tr.data, "Training dataset")->required()->check(CLI::ExistingFile);
  c_tr->add_option("--val", tr.val, "Validation dataset")->check(CLI::ExistingFile);
  c_tr->add_option("--test", tr.test, "Test dataset (default: training data)")->check(CLI::ExistingFile);
  c_tr->add_option("--loss", tr.loss, "mse | regret | sqde | spo+ | sce_yhat | sce_diff")->capture_default_str();
  c_tr->add_option("--path", tr.path, "subgradient | layer")->capture_default_str();
  c_tr->add_option("--solver", tr.solver, "Subgradient solver: exact | relaxed | cached")->capture_default_str();
  c_tr->add_option("--cache-p", tr.cache_p, "Solve probability for the cached solver")->capture_default_str();
  c_tr->add_option("--rho", tr.rho, "Smoothing strength")->capture_default_str();
  c_tr->add_option("--alpha", tr.alpha, "DYS step size")->capture_default_str();
  c_tr->add_option("--dys-iters", tr.dys_iters, "DYS iterations")->capture_default_str();
  c_tr->add_option("--dys-tol", tr.dys_tol, "DYS residual tolerance")->capture_default_str();
  c_tr->add_option("--dys-mode", tr.dys_mode, "fixed-iterations | to-convergence")->capture_default_str();
  c_tr->add_option("--vjp", tr.vjp, "active-set | jacobian-free")->capture_default_str();
  c_tr->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
  c_tr->add_option("--epochs", tr.epochs, "Epochs")->capture_default_str();
  c_tr->add_option("--batch", tr.batch, "Mini-batch size")->capture_default_str();
  c_tr->add_option("--optimizer", tr.optimizer, "sgd | adam")->capture_default_str();
  c_tr->add_option("--init", tr.init, "zeros | gaussian")->capture_default_str();
  c_tr->add_option("--seed", tr.seed, "Seed")->capture_default_str();
  c_tr->add_flag("--no-warm-start", tr.no_warm_start, "Start every DYS forward pass cold");
  c_tr->add_flag("--bias", tr.bias, "Add a bias term");
  c_tr->add_option("-o,--out", tr.out, "Per-epoch CSV (default stdout)");
  c_tr->add_option("--metrics", tr.metrics, "Final metrics CSV");
  c_tr->add_option("--timing", tr.timing, "Wall-clock CSV (default <out>.timing.csv when --out is set)");
  c_tr->add_option("--model-out", tr.model_out, "Write trained weights and optimizer state (JSON)");

  // eval
  std::string ev_data, ev_model, ev_out;
  auto* c_ev = app.add_subcommand("eval", "Normalized regret of a stored model on a dataset");
  c_ev->add_option("--data", ev_data, "Dataset")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--model", ev_model, "Model JSON")->required()->check(CLI::ExistingFile);
  c_ev->add_option("-o,--out", ev_out, "Output CSV (default stdout)");

  // knapsack-demo
  KnapsackDemoConfig demo;
  std::string demo_out, demo_opt = "sgd";
  auto* c_demo = app.add_subcommand("knapsack-demo", "Two-item knapsack: smoothed regret vs SCE trajectories");
  c_demo->add_option("--values", demo.true_values, "True item values")->expected(2)->capture_default_str();
  c_demo->add_option("--init", demo.init, "Initial predictions")->expected(2)->capture_default_str();
  c_demo->add_option("--rho", demo.rho, "Smoothing strength")->capture_default_str();
  c_demo->add_option("--alpha", demo.alpha, "DYS step size (0: 1/rho)")->capture_default_str();
  c_demo->add_option("--epochs", demo.epochs, "Epochs")->capture_default_str();
  c_demo->add_option("--lr", demo.learning_rate, "Learning rate")->capture_default_str();
  c_demo->add_option("--optimizer", demo_opt, "sgd | adam")->capture_default_str();
  c_demo->add_option("-o,--out", demo_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  set_log_level(quiet ? LogLevel::Quiet : LogLevel::Warning);
  if (!quiet) std::cerr << "# resolved configuration\n" << app.config_to_str(true, false) << std::flush;

  try {
    if (c_ill->parsed()) {
      emit(ill_out, cmd_illustrate_1d(ill).str());
    } else if (c_sim->parsed()) {
      sim.workers = worker_count();
      emit(sim_out, top1_table(sim, simulate_top1(sim)).str());
    } else if (c_gen->parsed()) {
      gen.data.b_dist = b_distribution_from_string(b_dist);
      const PtoDataset ds = generate(gen.data, make_problem(gen));
      save_dataset(ds, gen_out);
    } else if (c_tr->parsed()) {
      TrainCommandConfig cfg;
      cfg.train.loss.kind = loss_kind_from_string(tr.loss);
      cfg.train.loss.path = grad_path_from_string(tr.path);
      cfg.train.loss.solver = subgrad_solver_from_string(tr.solver);
      cfg.train.loss.cache_probability = tr.cache_p;
      cfg.train.loss.dys.rho = tr.rho;
      cfg.train.loss.dys.alpha = tr.alpha;
      cfg.train.loss.dys.max_iters = tr.dys_iters;
      cfg.train.loss.dys.tol = tr.dys_tol;
      cfg.train.loss.dys.mode = dys_mode_from_string(tr.dys_mode);
      cfg.train.loss.dys.vjp = vjp_mode_from_string(tr.vjp);
      cfg.train.learning_rate = tr.lr;
      cfg.train.epochs = tr.epochs;
      cfg.train.batch_size = tr.batch;
      cfg.train.optimizer = optimizer_from_string(tr.optimizer);
      cfg.train.seed = tr.seed;
      cfg.train.warm_start = !tr.no_warm_start;
      cfg.bias = tr.bias;
      cfg.init = tr.init;
      cfg.train.validate();

      const PtoDataset train_set = load_dataset(tr.data);
      PtoDataset val_set, test_set;
      if (!tr.val.empty()) val_set = load_dataset(tr.val);
      test_set = tr.test.empty() ? train_set : load_dataset(tr.test);
      const TrainOutcome out = run_training(cfg, train_set, tr.val.empty() ? nullptr : &val_set, test_set);
      emit(tr.out, out.epochs.str());
      if (!tr.metrics.empty()) write_text(tr.metrics, out.metrics.str());
      const std::string timing = !tr.timing.empty() ? tr.timing : (tr.out.empty() ? "" : tr.out + ".timing.csv");
      if (!timing.empty()) write_text(timing, out.timing.str());
      if (!tr.model_out.empty()) save_model(tr.model_out, out.report.model, &out.report.optimizer);
    } else if (c_ev->parsed()) {
      const PtoDataset ds = load_dataset(ev_data);
      const LinearModel model = load_model(ev_model);
      emit(ev_out, cmd_eval(model, ds, nlohmann::json{{"command", "eval"}, {"problem", ds.problem->name()}}).str());
    } else if (c_demo->parsed()) {
      demo.optimizer = optimizer_from_string(demo_opt);
      emit(demo_out, demo_table(demo, knapsack_demo(demo)).str());
    }
  } catch (const std::length_error& e) {
    return fail("too-large", e.what(), 6);
  } catch (const std::invalid_argument& e) {
    return fail("invalid-argument", e.what(), 3);
  } catch (const std::domain_error& e) {
    return fail("domain", e.what(), 3);
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    if (msg.rfind("schema error", 0) == 0) return fail("schema", msg, 4);
    if (msg.rfind("verification failed", 0) == 0) return fail("verification", msg, 5);
    return fail("runtime", msg, 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
