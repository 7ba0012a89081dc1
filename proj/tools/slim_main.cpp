#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slim/csv.hpp"
#include "slim/experiment.hpp"
#include "slim/model_io.hpp"
#include "slim/pipeline.hpp"
#include "slim/selfcheck.hpp"
#include "slim/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoConverge = 3;

struct GenArgs {
  int p = 20;
  int s = 3;
  int n = 200;
  double noise = 0.25;
  double magnitude = 1.0;
  std::uint64_t seed = 0;
  std::string transform;
  std::string out;
};

int run_gen(const GenArgs& a) {
  slim::synth::GeneratorConfig cfg;
  cfg.p = a.p;
  cfg.s = a.s;
  cfg.n = a.n;
  cfg.noise_variance = a.noise;
  cfg.theta_magnitude = a.magnitude;
  cfg.rng_seed = a.seed;
  if (!a.transform.empty()) {
    auto kind = slim::synth::transform_from_name(a.transform);
    if (!kind)
      throw std::invalid_argument("unknown transform '" + a.transform + "'");
    cfg.force_transform = kind;
  }
  slim::synth::Dataset ds = slim::synth::gen_dataset(cfg);

  fs::create_directories(a.out);
  std::string xpath = (fs::path(a.out) / "X.csv").string();
  std::string ypath = (fs::path(a.out) / "y.csv").string();
  std::string tpath = (fs::path(a.out) / "truth.json").string();
  slim::csvio::write_matrix(xpath, ds.X, slim::csvio::default_header(cfg.p));
  slim::csvio::write_vector(ypath, ds.y, "y");
  slim::model_io::save_truth(ds.truth, tpath);
  std::cout << "wrote " << xpath << " (" << ds.X.rows() << "x" << ds.X.cols()
            << "), " << ypath << ", " << tpath << "\n";
  return kExitOk;
}

struct FitArgs {
  std::string x_path;
  std::string y_path;
  std::string out;
  double gamma = 0.0;
  int solver_iters = 5000;
  int rounds = 100;
  int workers = 0;
  bool strict = false;
};

int run_fit(const FitArgs& a) {
  slim::Matrix X = slim::csvio::read_matrix(a.x_path);
  slim::Vector y = slim::csvio::read_vector(a.y_path);
  slim::dantzig::SolverConfig solver;
  solver.max_iterations = a.solver_iters;
  slim::cpav::BackfitConfig backfit;
  backfit.rounds = a.rounds;
  slim::SlimModel model =
      slim::fit(X, y, a.gamma, solver, backfit, a.workers);
  for (const auto& w : model.fit_metadata.warnings)
    std::cerr << "warning: " << w << "\n";
  slim::model_io::save_model(model, a.out);
  std::cout << "wrote " << a.out << "; support "
            << model.coefficients.support.size() << " of " << model.p
            << " features, sigma_y " << model.coefficients.sigma_y_hat
            << ", solver " << model.fit_metadata.solver_iterations
            << " iterations, backfit " << model.fit_metadata.backfit_rounds
            << " rounds\n";
  if (a.strict && !model.fit_metadata.solver_converged) {
    std::cerr << "error: selector did not converge\n";
    return kExitNoConverge;
  }
  return kExitOk;
}

struct PredictArgs {
  std::string model_path;
  std::string x_path;
  std::string out;
};

int run_predict(const PredictArgs& a) {
  slim::SlimModel model = slim::model_io::load_model(a.model_path);
  slim::Matrix X = slim::csvio::read_matrix(a.x_path);
  if (X.cols() != model.p)
    throw std::runtime_error("'" + a.x_path + "' has " +
                             std::to_string(X.cols()) + " columns, model expects " +
                             std::to_string(model.p));
  slim::Vector yhat = slim::predict(model, X);
  slim::csvio::write_vector(a.out, yhat, "yhat");
  std::cout << "wrote " << a.out << " (" << yhat.size() << " rows)\n";
  return kExitOk;
}

int run_experiment_cmd(const slim::harness::ExperimentConfig& cfg) {
  auto result = slim::harness::run_experiment(cfg);
  std::cout << "wrote " << result.metrics_path << " (" << result.rows_written
            << " rows, " << result.cells_computed << " cells computed)\n"
            << "wrote " << result.agg_path << "\n"
            << "wrote " << result.gamma_path << "\n";
  return kExitOk;
}

int run_check(std::uint64_t seed) {
  auto suites = slim::selfcheck::run_all(seed);
  bool ok = true;
  for (const auto& s : suites) {
    std::cout << s.name << ": " << s.cases << " cases, " << s.failures
              << " failures\n";
    for (const auto& m : s.messages) std::cout << "  " << m << "\n";
    if (!s.ok()) ok = false;
  }
  return ok ? kExitOk : kExitData;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse linear isotonic modeling toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  GenArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen", "write a synthetic dataset");
  cmd_gen->add_option("--p", gen.p, "features")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--s", gen.s, "active features")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--n", gen.n, "samples")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--noise", gen.noise, "noise variance")
      ->check(CLI::NonNegativeNumber);
  cmd_gen->add_option("--theta-magnitude", gen.magnitude,
                      "absolute value of the nonzero coefficients");
  cmd_gen->add_option("--seed", gen.seed, "rng seed");
  cmd_gen->add_option("--transform", gen.transform,
                      "force one transform for every feature");
  cmd_gen->add_option("--out", gen.out, "output directory")->required();

  FitArgs fit;
  CLI::App* cmd_fit = app.add_subcommand("fit", "fit a model from CSVs");
  cmd_fit->add_option("--x", fit.x_path, "design CSV")->required();
  cmd_fit->add_option("--y", fit.y_path, "response CSV")->required();
  cmd_fit->add_option("--gamma", fit.gamma, "selector tolerance")
      ->required()
      ->check(CLI::NonNegativeNumber);
  cmd_fit->add_option("--out", fit.out, "model JSON path")->required();
  cmd_fit->add_option("--solver-iters", fit.solver_iters,
                      "selector iteration cap");
  cmd_fit->add_option("--rounds", fit.rounds, "backfitting round cap");
  cmd_fit->add_option("--workers", fit.workers,
                      "worker threads (0 = all cores)");
  cmd_fit->add_flag("--strict", fit.strict,
                    "treat non-convergence as failure");

  PredictArgs pred;
  CLI::App* cmd_pred = app.add_subcommand("predict", "apply a model JSON");
  cmd_pred->add_option("--model", pred.model_path, "model JSON")->required();
  cmd_pred->add_option("--x", pred.x_path, "design CSV")->required();
  cmd_pred->add_option("--out", pred.out, "prediction CSV path")->required();

  slim::harness::ExperimentConfig exp;
  bool paper_scale = false;
  bool no_resume = false;
  CLI::App* cmd_exp =
      app.add_subcommand("experiment", "run the synthetic benchmark sweep");
  cmd_exp->add_option("--out", exp.out_dir, "output directory")->required();
  auto* opt_p = cmd_exp->add_option("--p", exp.p, "features");
  auto* opt_s = cmd_exp->add_option("--s", exp.s, "active features");
  auto* opt_trials = cmd_exp->add_option("--trials", exp.trials,
                                         "trials per sample size");
  cmd_exp->add_option("--n-grid", exp.n_grid, "sample sizes")
      ->delimiter(',');
  cmd_exp->add_option("--gamma-count", exp.gamma_count, "gamma grid size");
  cmd_exp->add_option("--gamma-span", exp.gamma_span,
                      "largest over smallest grid gamma");
  cmd_exp->add_option("--noise", exp.noise_variance, "noise variance");
  cmd_exp->add_option("--test-size", exp.test_size, "test rows per trial");
  cmd_exp->add_option("--holdout-size", exp.holdout_size,
                      "tuning rows per trial");
  cmd_exp->add_option("--seed", exp.base_seed, "base rng seed");
  cmd_exp->add_option("--solver-iters", exp.solver.max_iterations,
                      "LP iteration cap per fit");
  cmd_exp->add_option("--workers", exp.workers,
                      "worker threads (0 = all cores)");
  cmd_exp->add_flag("--paper-scale", paper_scale,
                    "p=500, s=10, 100 trials unless given explicitly");
  cmd_exp->add_flag("--no-resume", no_resume,
                    "recompute cells already present in the output");

  std::uint64_t check_seed = 42;
  CLI::App* cmd_check =
      app.add_subcommand("check", "run the built-in verification suites");
  cmd_check->add_option("--seed", check_seed, "rng seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) return run_gen(gen);
    if (cmd_fit->parsed()) return run_fit(fit);
    if (cmd_pred->parsed()) return run_predict(pred);
    if (cmd_exp->parsed()) {
      if (paper_scale) {
        if (!opt_p->count()) exp.p = 500;
        if (!opt_s->count()) exp.s = 10;
        if (!opt_trials->count()) exp.trials = 100;
      }
      exp.resume = !no_resume;
      return run_experiment_cmd(exp);
    }
    if (cmd_check->parsed()) return run_check(check_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
