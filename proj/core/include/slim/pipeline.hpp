#pragma once

#include <map>
#include <string>
#include <vector>

#include "slim/cpav.hpp"
#include "slim/dantzig.hpp"
#include "slim/rank_corr.hpp"
#include "slim/types.hpp"

namespace slim {

struct SparseCoefficients {
  Vector theta_check;       // solver output
  Vector theta_hat;         // sigma_y_hat * theta_check
  std::vector<int> support; // |theta_hat_j| > support_eps
  double sigma_y_hat = 0.0;
};

// |theta_hat_j| must exceed this to count as support.
double support_threshold(const Vector& theta_hat);

struct TransformTable {
  std::vector<double> knots;   // strictly ascending unique x values
  std::vector<double> values;  // fitted values, non-decreasing
};

struct FitMetadata {
  double gamma = 0.0;
  int solver_iterations = 0;
  bool solver_converged = true;
  int backfit_rounds = 0;
  std::vector<double> objective_history;
  std::vector<std::string> warnings;
};

struct SlimModel {
  int p = 0;
  SparseCoefficients coefficients;
  std::map<int, TransformTable> transforms;  // keyed by support feature
  FitMetadata fit_metadata;
};

// sqrt(sum (y_i - mean)^2 / (n-1)); throws on constant y.
double sample_std(const Vector& y);

SlimModel fit(const Matrix& X, const Vector& y, double gamma,
              const dantzig::SolverConfig& solver_cfg = {},
              const cpav::BackfitConfig& backfit_cfg = {}, int workers = 0);

// fit() plus the estimated hidden design (empty matrix when the support is
// empty). The with-stats variant reuses precomputed rank statistics, which
// a gamma grid search wants.
struct FitResult {
  SlimModel model;
  Matrix X_hat;
};

FitResult fit_detailed(const Matrix& X, const Vector& y, double gamma,
                       const dantzig::SolverConfig& solver_cfg = {},
                       const cpav::BackfitConfig& backfit_cfg = {},
                       int workers = 0);

FitResult fit_with_stats(const Matrix& X, const Vector& y,
                         const rank_corr::RankCorrelation& stats,
                         double sigma_y, double gamma,
                         const dantzig::SolverConfig& solver_cfg = {},
                         const cpav::BackfitConfig& backfit_cfg = {});

// Nearest-neighbor lookup in feature j's knot table; exact midpoints go to
// the smaller knot.
double interpolate(const SlimModel& model, int j, double x_query);

Vector predict(const SlimModel& model, const Matrix& X_new);

} // namespace slim
