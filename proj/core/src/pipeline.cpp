#include "slim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace slim {

double sample_std(const Vector& y) {
  long n = y.size();
  if (n < 2) throw std::invalid_argument("sample_std: need n >= 2");
  if (!y.allFinite())
    throw std::invalid_argument("sample_std: non-finite entry");
  double mean = y.mean();
  double ss = (y.array() - mean).square().sum();
  if (ss == 0.0)
    throw std::runtime_error("sample_std: response is constant");
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double support_threshold(const Vector& theta_hat) {
  double tinf = theta_hat.size() ? theta_hat.cwiseAbs().maxCoeff() : 0.0;
  return 1e-6 * std::max(1.0, tinf);
}

namespace {

TransformTable build_table(const Vector& x_col, const Vector& xhat_col) {
  long n = x_col.size();
  std::vector<int> idx(n);
  for (long i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return x_col(a) < x_col(b); });
  TransformTable table;
  for (long k = 0; k < n; ++k) {
    double x = x_col(idx[k]);
    if (table.knots.empty() || x != table.knots.back()) {
      table.knots.push_back(x);
      table.values.push_back(xhat_col(idx[k]));
    }
    // duplicates carry the same fitted value: the cone pools exact ties
  }
  return table;
}

} // namespace

FitResult fit_with_stats(const Matrix& X, const Vector& y,
                         const rank_corr::RankCorrelation& stats,
                         double sigma_y, double gamma,
                         const dantzig::SolverConfig& solver_cfg,
                         const cpav::BackfitConfig& backfit_cfg) {
  long n = X.rows(), p = X.cols();
  if (y.size() != n)
    throw std::invalid_argument("fit: X and y dimensions disagree");
  if (!(gamma >= 0)) throw std::invalid_argument("fit: gamma must be >= 0");

  FitResult out;
  SlimModel& model = out.model;
  model.p = static_cast<int>(p);
  auto& warnings = model.fit_metadata.warnings;

  for (long j = 0; j < p; ++j)
    if (X.col(j).minCoeff() == X.col(j).maxCoeff())
      warnings.push_back("feature " + std::to_string(j) +
                         " is constant; its rank statistics are degenerate");

  dantzig::KdsProblem prob{stats.sigma_hat, stats.beta_hat, gamma};
  dantzig::KdsSolution sol = dantzig::solve_kds(prob, solver_cfg);
  if (!sol.converged)
    warnings.push_back(
        sol.status == dantzig::SolveStatus::infeasible
            ? "selector reported an infeasible constraint set"
            : "selector stopped at the iteration limit");

  SparseCoefficients& coef = model.coefficients;
  coef.theta_check = sol.theta_check;
  coef.sigma_y_hat = sigma_y;
  coef.theta_hat = sigma_y * sol.theta_check;
  double eps = support_threshold(coef.theta_hat);
  for (long j = 0; j < p; ++j)
    if (std::abs(coef.theta_hat(j)) > eps)
      coef.support.push_back(static_cast<int>(j));

  model.fit_metadata.gamma = gamma;
  model.fit_metadata.solver_iterations = sol.iterations;
  model.fit_metadata.solver_converged = sol.converged;

  if (coef.support.empty()) {
    warnings.push_back("empty support; the model predicts zero");
    return out;
  }

  Vector theta_active = Vector::Zero(p);
  for (int j : coef.support) theta_active(j) = coef.theta_hat(j);
  cpav::BackfitState state =
      cpav::estimate_hidden_design(y, X, theta_active, backfit_cfg);
  out.X_hat = state.X_hat;
  model.fit_metadata.backfit_rounds = state.rounds_run;
  model.fit_metadata.objective_history = state.objective_history;

  for (int j : coef.support)
    model.transforms.emplace(j, build_table(X.col(j), state.X_hat.col(j)));
  return out;
}

FitResult fit_detailed(const Matrix& X, const Vector& y, double gamma,
                       const dantzig::SolverConfig& solver_cfg,
                       const cpav::BackfitConfig& backfit_cfg, int workers) {
  if (X.rows() != y.size())
    throw std::invalid_argument("fit: X and y dimensions disagree");
  if (X.rows() < 2) throw std::invalid_argument("fit: need n >= 2");
  auto stats = rank_corr::estimate(X, y, workers);
  double sigma_y = sample_std(y);
  return fit_with_stats(X, y, stats, sigma_y, gamma, solver_cfg,
                        backfit_cfg);
}

SlimModel fit(const Matrix& X, const Vector& y, double gamma,
              const dantzig::SolverConfig& solver_cfg,
              const cpav::BackfitConfig& backfit_cfg, int workers) {
  return fit_detailed(X, y, gamma, solver_cfg, backfit_cfg, workers).model;
}

double interpolate(const SlimModel& model, int j, double x_query) {
  auto it = model.transforms.find(j);
  if (it == model.transforms.end())
    throw std::invalid_argument("interpolate: feature " + std::to_string(j) +
                                " is not in the support");
  const TransformTable& t = it->second;
  const auto& k = t.knots;
  auto pos = std::lower_bound(k.begin(), k.end(), x_query);
  if (pos == k.begin()) return t.values.front();
  if (pos == k.end()) return t.values.back();
  std::size_t i = pos - k.begin();
  // exact midpoints take the smaller knot
  if (x_query - k[i - 1] <= k[i] - x_query) return t.values[i - 1];
  return t.values[i];
}

Vector predict(const SlimModel& model, const Matrix& X_new) {
  if (X_new.cols() != model.p)
    throw std::invalid_argument("predict: feature count mismatch");
  Vector yhat = Vector::Zero(X_new.rows());
  for (long i = 0; i < X_new.rows(); ++i) {
    double acc = 0.0;
    for (int j : model.coefficients.support)
      acc += model.coefficients.theta_hat(j) *
             interpolate(model, j, X_new(i, j));
    yhat(i) = acc;
  }
  return yhat;
}

} // namespace slim
