#include "slim/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>

#include "slim/csv.hpp"
#include "slim/parallel.hpp"
#include "slim/rng.hpp"

namespace slim::harness {

namespace {

namespace fs = std::filesystem;

constexpr const char* kMetricsHeader =
    "n,trial,gamma_index,gamma,theta_error,design_error,prediction_mse,"
    "prediction_mse_baseline,support_precision,support_recall,"
    "runtime_seconds,selected_slim,selected_baseline";

std::string row_line(const MetricsRow& m) {
  using csvio::format_double;
  std::string s;
  s += std::to_string(m.n);
  s += ',';
  s += std::to_string(m.trial);
  s += ',';
  s += std::to_string(m.gamma_index);
  s += ',';
  s += format_double(m.gamma);
  s += ',';
  s += format_double(m.theta_error);
  s += ',';
  s += format_double(m.design_error);
  s += ',';
  s += format_double(m.prediction_mse);
  s += ',';
  s += format_double(m.prediction_mse_baseline);
  s += ',';
  s += format_double(m.support_precision);
  s += ',';
  s += format_double(m.support_recall);
  s += ',';
  s += format_double(m.runtime_seconds);
  s += ',';
  s += std::to_string(m.selected_slim);
  s += ',';
  s += std::to_string(m.selected_baseline);
  return s;
}

double mse(const Vector& pred, const Vector& truth) {
  return (pred - truth).squaredNorm() / static_cast<double>(truth.size());
}

// type-7 quantile on a sorted copy
double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  double h = (static_cast<double>(v.size()) - 1.0) * q;
  std::size_t lo = static_cast<std::size_t>(h);
  double frac = h - static_cast<double>(lo);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

struct SupportMetrics {
  double precision;
  double recall;
};

SupportMetrics support_metrics(const std::vector<int>& estimated,
                               const Vector& theta_tilde) {
  std::set<int> truth;
  for (long j = 0; j < theta_tilde.size(); ++j)
    if (theta_tilde(j) != 0.0) truth.insert(static_cast<int>(j));
  int hit = 0;
  for (int j : estimated)
    if (truth.count(j)) ++hit;
  SupportMetrics sm;
  sm.precision = estimated.empty()
                     ? 1.0
                     : static_cast<double>(hit) / estimated.size();
  sm.recall = truth.empty() ? 1.0
                            : static_cast<double>(hit) / truth.size();
  return sm;
}

} // namespace

std::vector<double> gamma_grid(double gamma_max, int count, double span,
                               double top_fraction) {
  if (count < 1) throw std::invalid_argument("gamma_grid: count >= 1");
  if (!(span > 1.0)) throw std::invalid_argument("gamma_grid: span > 1");
  if (!(top_fraction > 0))
    throw std::invalid_argument("gamma_grid: top_fraction > 0");
  double top = top_fraction * gamma_max;
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = top;
    return grid;
  }
  for (int k = 0; k < count; ++k)
    grid[k] = top * std::pow(span, -static_cast<double>(k) / (count - 1));
  return grid;
}

BaselineModel baseline_fit_model(const Matrix& X, const Vector& y,
                                 double gamma,
                                 const dantzig::SolverConfig& cfg) {
  long n = X.rows(), p = X.cols();
  if (y.size() != n)
    throw std::invalid_argument("baseline: X and y dimensions disagree");
  if (n < 2) throw std::invalid_argument("baseline: need n >= 2");

  BaselineModel model;
  model.mean = X.colwise().mean();
  model.scale = Vector::Zero(p);
  Matrix Xc(n, p);
  for (long j = 0; j < p; ++j) {
    Vector centered = X.col(j).array() - model.mean(j);
    double ss = centered.squaredNorm();
    if (ss == 0.0) {
      model.dropped.push_back(static_cast<int>(j));
      Xc.col(j).setZero();
    } else {
      model.scale(j) = std::sqrt(ss / static_cast<double>(n - 1));
      Xc.col(j) = centered / model.scale(j);
    }
  }

  dantzig::KdsProblem prob;
  prob.Q = Xc.transpose() * Xc / static_cast<double>(n);
  prob.Q = ((prob.Q + prob.Q.transpose()) / 2.0).eval();
  prob.r = Xc.transpose() * y / static_cast<double>(n);
  prob.gamma = gamma;
  dantzig::KdsSolution sol = dantzig::solve_kds(prob, cfg);
  model.solver_converged = sol.converged;

  model.coefficients.theta_check = sol.theta_check;
  model.coefficients.theta_hat = sol.theta_check;
  model.coefficients.sigma_y_hat = 1.0;
  double eps = support_threshold(model.coefficients.theta_hat);
  for (long j = 0; j < p; ++j)
    if (std::abs(model.coefficients.theta_hat(j)) > eps)
      model.coefficients.support.push_back(static_cast<int>(j));
  return model;
}

SparseCoefficients baseline_linear_fit(const Matrix& X, const Vector& y,
                                       double gamma,
                                       const dantzig::SolverConfig& cfg) {
  return baseline_fit_model(X, y, gamma, cfg).coefficients;
}

Vector baseline_predict(const BaselineModel& model, const Matrix& X_new) {
  if (X_new.cols() != model.mean.size())
    throw std::invalid_argument("baseline_predict: feature count mismatch");
  Vector yhat = Vector::Zero(X_new.rows());
  for (int j : model.coefficients.support) {
    double scale = model.scale(j);
    if (scale == 0.0) continue;
    yhat += model.coefficients.theta_hat(j) *
            ((X_new.col(j).array() - model.mean(j)) / scale).matrix();
  }
  return yhat;
}

namespace {

struct CellKey {
  int n;
  int trial;
  bool operator<(const CellKey& o) const {
    return n != o.n ? n < o.n : trial < o.trial;
  }
};

struct TrialPlan {
  int trial;
  std::vector<int> missing_n;
};

std::vector<MetricsRow> compute_cell(const ExperimentConfig& cfg,
                                     const synth::Dataset& ds, int n,
                                     int trial, int n_max) {
  const Matrix& X = ds.X;
  const Vector& y = ds.y;
  Matrix Xt = X.topRows(n);
  Vector yt = y.head(n);
  Matrix Xh = X.middleRows(n_max, cfg.holdout_size);
  Vector yh = y.segment(n_max, cfg.holdout_size);
  Matrix Xe = X.middleRows(n_max + cfg.holdout_size, cfg.test_size);
  Vector ye = y.segment(n_max + cfg.holdout_size, cfg.test_size);

  auto stats = rank_corr::estimate(Xt, yt, 1);
  double sigma_y = sample_std(yt);
  double gmax_slim = stats.beta_hat.cwiseAbs().maxCoeff();
  auto grid_slim = gamma_grid(gmax_slim, cfg.gamma_count, cfg.gamma_span,
                              cfg.gamma_top_fraction);

  Matrix x_tilde_train = ds.truth.x_tilde.topRows(n);
  double x_tilde_norm = x_tilde_train.norm();
  double theta_norm = ds.truth.theta_tilde.norm();

  std::vector<MetricsRow> rows(cfg.gamma_count);
  std::vector<double> holdout_slim(cfg.gamma_count);
  std::vector<double> holdout_base(cfg.gamma_count);

  // the grid runs from the loosest gamma down; each solve seeds the next
  // one, which is what makes the smallest gammas affordable
  dantzig::SolverConfig slim_solver = cfg.solver;
  for (int k = 0; k < cfg.gamma_count; ++k) {
    auto t0 = std::chrono::steady_clock::now();

    FitResult fr = fit_with_stats(Xt, yt, stats, sigma_y, grid_slim[k],
                                  slim_solver, cfg.backfit);
    slim_solver.warm_start = fr.model.coefficients.theta_check;
    Vector pred_h = predict(fr.model, Xh);
    Vector pred_e = predict(fr.model, Xe);

    MetricsRow& m = rows[k];
    m.n = n;
    m.trial = trial;
    m.gamma_index = k;
    m.gamma = grid_slim[k];
    m.theta_error =
        (fr.model.coefficients.theta_hat - ds.truth.theta_tilde).norm() /
        theta_norm;
    if (fr.X_hat.size() == 0)
      m.design_error = 1.0;  // X_hat = 0 on an empty support
    else
      m.design_error = (fr.X_hat - x_tilde_train).norm() / x_tilde_norm;
    m.prediction_mse = mse(pred_e, ye);
    holdout_slim[k] = mse(pred_h, yh);
    auto sm = support_metrics(fr.model.coefficients.support,
                              ds.truth.theta_tilde);
    m.support_precision = sm.precision;
    m.support_recall = sm.recall;

    auto t1 = std::chrono::steady_clock::now();
    m.runtime_seconds =
        std::chrono::duration<double>(t1 - t0).count();
  }

  // baseline sweep
  {
    long nn = Xt.rows();
    Matrix Xc(nn, Xt.cols());
    Vector mu = Xt.colwise().mean();
    Vector sd = Vector::Zero(Xt.cols());
    for (long j = 0; j < Xt.cols(); ++j) {
      Vector centered = Xt.col(j).array() - mu(j);
      double ss = centered.squaredNorm();
      if (ss == 0.0) {
        Xc.col(j).setZero();
      } else {
        sd(j) = std::sqrt(ss / static_cast<double>(nn - 1));
        Xc.col(j) = centered / sd(j);
      }
    }
    Vector rb = Xc.transpose() * yt / static_cast<double>(nn);
    double gmax_base = rb.cwiseAbs().maxCoeff();
    auto grid_base = gamma_grid(gmax_base, cfg.gamma_count, cfg.gamma_span,
                                cfg.gamma_top_fraction);
    dantzig::SolverConfig base_solver = cfg.solver;
    for (int k = 0; k < cfg.gamma_count; ++k) {
      auto t0 = std::chrono::steady_clock::now();
      BaselineModel base =
          baseline_fit_model(Xt, yt, grid_base[k], base_solver);
      base_solver.warm_start = base.coefficients.theta_check;
      holdout_base[k] = mse(baseline_predict(base, Xh), yh);
      rows[k].prediction_mse_baseline = mse(baseline_predict(base, Xe), ye);
      auto t1 = std::chrono::steady_clock::now();
      rows[k].runtime_seconds +=
          std::chrono::duration<double>(t1 - t0).count();
    }
  }

  int best_slim = static_cast<int>(
      std::min_element(holdout_slim.begin(), holdout_slim.end()) -
      holdout_slim.begin());
  int best_base = static_cast<int>(
      std::min_element(holdout_base.begin(), holdout_base.end()) -
      holdout_base.begin());
  rows[best_slim].selected_slim = 1;
  rows[best_base].selected_baseline = 1;
  return rows;
}

void write_aggregates(const ExperimentConfig& cfg,
                      const std::vector<MetricsRow>& rows,
                      const std::string& agg_path,
                      const std::string& gamma_path) {
  std::map<int, std::vector<const MetricsRow*>> by_n_slim, by_n_base;
  for (const auto& m : rows) {
    if (m.selected_slim) by_n_slim[m.n].push_back(&m);
    if (m.selected_baseline) by_n_base[m.n].push_back(&m);
  }

  std::ofstream agg(agg_path, std::ios::binary);
  if (!agg) throw std::runtime_error("cannot open '" + agg_path + "'");
  agg << "n,trials,theta_error_median,theta_error_q25,theta_error_q75,"
         "design_error_median,design_error_q25,design_error_q75,"
         "mse_slim_median,mse_slim_q25,mse_slim_q75,"
         "mse_baseline_median,mse_baseline_q25,mse_baseline_q75,"
         "support_precision_median,support_recall_median\n";
  using csvio::format_double;
  for (const auto& [n, sel] : by_n_slim) {
    std::vector<double> te, de, ms, mb, sp, sr;
    for (const auto* m : sel) {
      te.push_back(m->theta_error);
      de.push_back(m->design_error);
      ms.push_back(m->prediction_mse);
      sp.push_back(m->support_precision);
      sr.push_back(m->support_recall);
    }
    for (const auto* m : by_n_base[n]) mb.push_back(m->prediction_mse_baseline);
    agg << n << ',' << sel.size();
    for (double q : {0.5, 0.25, 0.75}) agg << ',' << format_double(quantile(te, q));
    for (double q : {0.5, 0.25, 0.75}) agg << ',' << format_double(quantile(de, q));
    for (double q : {0.5, 0.25, 0.75}) agg << ',' << format_double(quantile(ms, q));
    for (double q : {0.5, 0.25, 0.75}) agg << ',' << format_double(quantile(mb, q));
    agg << ',' << format_double(quantile(sp, 0.5));
    agg << ',' << format_double(quantile(sr, 0.5)) << '\n';
  }

  // gamma path at the largest n
  int n_max = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());
  std::map<int, std::vector<double>> slim_by_k, base_by_k, gamma_by_k,
      theta_by_k;
  for (const auto& m : rows) {
    if (m.n != n_max) continue;
    slim_by_k[m.gamma_index].push_back(m.prediction_mse);
    base_by_k[m.gamma_index].push_back(m.prediction_mse_baseline);
    gamma_by_k[m.gamma_index].push_back(m.gamma);
    theta_by_k[m.gamma_index].push_back(m.theta_error);
  }
  std::ofstream gp(gamma_path, std::ios::binary);
  if (!gp) throw std::runtime_error("cannot open '" + gamma_path + "'");
  gp << "gamma_index,gamma_over_gamma_max,gamma_median,mse_slim_median,"
        "mse_baseline_median,theta_error_median\n";
  for (const auto& [k, v] : slim_by_k) {
    double frac =
        cfg.gamma_top_fraction *
        std::pow(cfg.gamma_span,
                 cfg.gamma_count == 1
                     ? 0.0
                     : -static_cast<double>(k) / (cfg.gamma_count - 1));
    gp << k << ',' << format_double(frac) << ','
       << format_double(quantile(gamma_by_k[k], 0.5)) << ','
       << format_double(quantile(v, 0.5)) << ','
       << format_double(quantile(base_by_k[k], 0.5)) << ','
       << format_double(quantile(theta_by_k[k], 0.5)) << '\n';
  }
}

} // namespace

std::vector<MetricsRow> read_metrics(const std::string& path) {
  csvio::Table t = csvio::read_table(path);
  std::vector<std::string> expect;
  {
    std::string h = kMetricsHeader;
    std::size_t start = 0;
    while (start <= h.size()) {
      std::size_t pos = h.find(',', start);
      if (pos == std::string::npos) pos = h.size();
      expect.push_back(h.substr(start, pos - start));
      start = pos + 1;
    }
  }
  if (t.header != expect)
    throw std::runtime_error("'" + path + "': unexpected metrics header");
  std::vector<MetricsRow> rows;
  rows.reserve(t.values.rows());
  for (long i = 0; i < t.values.rows(); ++i) {
    MetricsRow m;
    m.n = static_cast<int>(t.values(i, 0));
    m.trial = static_cast<int>(t.values(i, 1));
    m.gamma_index = static_cast<int>(t.values(i, 2));
    m.gamma = t.values(i, 3);
    m.theta_error = t.values(i, 4);
    m.design_error = t.values(i, 5);
    m.prediction_mse = t.values(i, 6);
    m.prediction_mse_baseline = t.values(i, 7);
    m.support_precision = t.values(i, 8);
    m.support_recall = t.values(i, 9);
    m.runtime_seconds = t.values(i, 10);
    m.selected_slim = static_cast<int>(t.values(i, 11));
    m.selected_baseline = static_cast<int>(t.values(i, 12));
    rows.push_back(m);
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.n_grid.empty())
    throw std::invalid_argument("run_experiment: empty n grid");
  if (cfg.trials < 1) throw std::invalid_argument("run_experiment: trials >= 1");
  if (cfg.p < 1 || cfg.s < 1 || cfg.s > cfg.p)
    throw std::invalid_argument("run_experiment: need 1 <= s <= p");
  if (cfg.test_size < 1 || cfg.holdout_size < 1)
    throw std::invalid_argument("run_experiment: test and holdout sizes >= 1");
  if (cfg.out_dir.empty())
    throw std::invalid_argument("run_experiment: out_dir required");
  for (int n : cfg.n_grid)
    if (n < 2) throw std::invalid_argument("run_experiment: n >= 2");

  fs::create_directories(cfg.out_dir);
  std::string metrics_path = (fs::path(cfg.out_dir) / "metrics.csv").string();
  std::string agg_path = (fs::path(cfg.out_dir) / "metrics_agg.csv").string();
  std::string gpath_path = (fs::path(cfg.out_dir) / "gamma_path.csv").string();

  std::vector<int> n_grid = cfg.n_grid;
  std::sort(n_grid.begin(), n_grid.end());
  n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
  int n_max = n_grid.back();

  // resume: keep fully populated (n, trial) cells from a previous run
  std::map<CellKey, std::vector<MetricsRow>> cells;
  if (cfg.resume && fs::exists(metrics_path)) {
    std::map<CellKey, std::vector<MetricsRow>> found;
    for (const auto& m : read_metrics(metrics_path))
      found[{m.n, m.trial}].push_back(m);
    for (auto& [key, rows] : found) {
      if (static_cast<int>(rows.size()) != cfg.gamma_count) continue;
      if (key.trial < 0 || key.trial >= cfg.trials) continue;
      if (!std::binary_search(n_grid.begin(), n_grid.end(), key.n)) continue;
      std::sort(rows.begin(), rows.end(),
                [](const MetricsRow& a, const MetricsRow& b) {
                  return a.gamma_index < b.gamma_index;
                });
      bool indexed = true;
      for (int k = 0; k < cfg.gamma_count; ++k)
        if (rows[k].gamma_index != k) indexed = false;
      if (indexed) cells.emplace(key, std::move(rows));
    }
  }

  std::vector<TrialPlan> plans;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    TrialPlan plan{trial, {}};
    for (int n : n_grid)
      if (!cells.count({n, trial})) plan.missing_n.push_back(n);
    if (!plan.missing_n.empty()) plans.push_back(std::move(plan));
  }

  // crash-safe appending of finished cells; the final rewrite sorts
  bool fresh = !fs::exists(metrics_path) || !cfg.resume || cells.empty();
  std::ofstream append(metrics_path, fresh ? std::ios::binary
                                           : std::ios::binary | std::ios::app);
  if (!append)
    throw std::runtime_error("cannot open '" + metrics_path + "'");
  if (fresh) append << kMetricsHeader << '\n';

  std::mutex writer_mutex;
  int computed = 0;
  parallel_for(plans.size(), cfg.workers, [&](std::size_t pi) {
    const TrialPlan& plan = plans[pi];
    synth::GeneratorConfig gen;
    gen.p = cfg.p;
    gen.s = cfg.s;
    gen.n = n_max + cfg.holdout_size + cfg.test_size;
    gen.noise_variance = cfg.noise_variance;
    gen.rng_seed = rng::derive(cfg.base_seed, plan.trial);
    synth::Dataset ds = synth::gen_dataset(gen);
    for (int n : plan.missing_n) {
      auto rows = compute_cell(cfg, ds, n, plan.trial, n_max);
      std::lock_guard<std::mutex> lock(writer_mutex);
      for (const auto& m : rows) append << row_line(m) << '\n';
      append.flush();
      cells.emplace(CellKey{n, plan.trial}, std::move(rows));
      ++computed;
    }
  });
  append.close();

  // deterministic final outputs
  std::vector<MetricsRow> all;
  all.reserve(cells.size() * cfg.gamma_count);
  for (const auto& [key, rows] : cells)
    for (const auto& m : rows) all.push_back(m);
  {
    std::ofstream out(metrics_path, std::ios::binary);
    out << kMetricsHeader << '\n';
    for (const auto& m : all) out << row_line(m) << '\n';
    if (!out) throw std::runtime_error("write failed for metrics.csv");
  }
  write_aggregates(cfg, all, agg_path, gpath_path);

  ExperimentResult result;
  result.metrics_path = metrics_path;
  result.agg_path = agg_path;
  result.gamma_path = gpath_path;
  result.rows_written = static_cast<int>(all.size());
  result.cells_computed = computed;
  return result;
}

} // namespace slim::harness
