#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slim/cpav.hpp"
#include "slim/dantzig.hpp"
#include "slim/pipeline.hpp"
#include "slim/synth.hpp"
#include "slim/types.hpp"

namespace slim::harness {

struct ExperimentConfig {
  std::vector<int> n_grid = {100, 200, 300, 400, 500};
  int trials = 20;
  int p = 100;
  int s = 5;
  double noise_variance = 0.25;
  int gamma_count = 10;
  double gamma_span = 512.0;        // largest grid value / smallest
  double gamma_top_fraction = 0.5;  // largest grid value as a fraction of
                                    // the method's zero-solution threshold
  int test_size = 200;
  int holdout_size = 100;
  std::uint64_t base_seed = 1;
  std::string out_dir;
  int workers = 0;
  dantzig::SolverConfig solver;
  cpav::BackfitConfig backfit;
  bool resume = true;
};

struct MetricsRow {
  int n = 0;
  int trial = 0;
  int gamma_index = 0;
  double gamma = 0.0;  // SLIM's gamma; the baseline grid shares the index
  double theta_error = 0.0;
  double design_error = 0.0;
  double prediction_mse = 0.0;
  double prediction_mse_baseline = 0.0;
  double support_precision = 0.0;
  double support_recall = 0.0;
  double runtime_seconds = 0.0;
  int selected_slim = 0;      // 1 on the holdout-chosen row for SLIM
  int selected_baseline = 0;  // 1 on the holdout-chosen row for the baseline
};

struct ExperimentResult {
  std::string metrics_path;
  std::string agg_path;
  std::string gamma_path;
  int rows_written = 0;
  int cells_computed = 0;  // (n, trial) cells not satisfied by resume
};

// Dantzig selector on column-standardized observed predictors; constant
// columns are dropped (coefficient pinned to zero) with a warning.
struct BaselineModel {
  SparseCoefficients coefficients;
  Vector mean;
  Vector scale;  // sd; 0 marks a dropped column
  std::vector<int> dropped;
  bool solver_converged = true;
};

BaselineModel baseline_fit_model(const Matrix& X, const Vector& y,
                                 double gamma,
                                 const dantzig::SolverConfig& cfg = {});
SparseCoefficients baseline_linear_fit(const Matrix& X, const Vector& y,
                                       double gamma,
                                       const dantzig::SolverConfig& cfg = {});
Vector baseline_predict(const BaselineModel& model, const Matrix& X_new);

// Log-spaced descending grid: top = gamma_top_fraction * gamma_max, ratio
// span between first and last entries.
std::vector<double> gamma_grid(double gamma_max, int count, double span,
                               double top_fraction);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::vector<MetricsRow> read_metrics(const std::string& path);

} // namespace slim::harness
