#include "slim/cpav.hpp"

#include <cmath>
#include <stdexcept>

namespace slim::cpav {

Vector residue(const Vector& y, const Vector& theta_hat,
               const Matrix& X_current, const Matrix& X_previous, int j) {
  long n = y.size(), p = theta_hat.size();
  if (X_current.rows() != n || X_previous.rows() != n ||
      X_current.cols() != p || X_previous.cols() != p)
    throw std::invalid_argument("residue: dimension mismatch");
  if (j < 0 || j >= p) throw std::invalid_argument("residue: j out of range");
  if (theta_hat(j) == 0.0)
    throw std::invalid_argument("residue: block j is inactive");

  Vector r = y;
  for (int i = 0; i < j; ++i)
    if (theta_hat(i) != 0.0) r -= theta_hat(i) * X_current.col(i);
  for (long i = j + 1; i < p; ++i)
    if (theta_hat(i) != 0.0) r -= theta_hat(i) * X_previous.col(i);
  return r;
}

Vector block_update(const Vector& r_j, double theta_j,
                    const isotonic::MonotoneOrder& order_j) {
  if (theta_j == 0.0)
    throw std::invalid_argument("block_update: theta_j must be nonzero");
  return isotonic::standardized_isotonic(r_j / theta_j, order_j).value;
}

BackfitState estimate_hidden_design(const Vector& y, const Matrix& X,
                                    const Vector& theta_hat,
                                    const BackfitConfig& cfg) {
  long n = y.size(), p = theta_hat.size();
  if (X.rows() != n || X.cols() != p)
    throw std::invalid_argument("estimate_hidden_design: dimension mismatch");
  if (cfg.rounds < 1)
    throw std::invalid_argument("estimate_hidden_design: rounds >= 1");
  if (cfg.rel_tol < 0)
    throw std::invalid_argument("estimate_hidden_design: rel_tol >= 0");
  if (!y.allFinite() || !X.allFinite() || !theta_hat.allFinite())
    throw std::invalid_argument("estimate_hidden_design: non-finite input");

  BackfitState state;
  for (long j = 0; j < p; ++j)
    if (theta_hat(j) != 0.0) state.active_set.push_back(static_cast<int>(j));
  if (state.active_set.empty())
    throw std::invalid_argument("estimate_hidden_design: theta_hat is zero");

  std::vector<isotonic::MonotoneOrder> orders;
  orders.reserve(state.active_set.size());
  for (int j : state.active_set)
    orders.push_back(isotonic::monotone_order(X.col(j)));

  state.X_hat = Matrix::Zero(n, p);
  Vector residual = y;  // X_hat is zero
  double obj = 0.5 * residual.squaredNorm();
  if (cfg.track_objective) state.objective_history.push_back(obj);

  for (int round = 1; round <= cfg.rounds; ++round) {
    double obj_prev = obj;
    for (std::size_t a = 0; a < state.active_set.size(); ++a) {
      int j = state.active_set[a];
      double tj = theta_hat(j);
      Vector r_j = residual + tj * state.X_hat.col(j);
      Vector cand = block_update(r_j, tj, orders[a]);
      // decrease from the swap, evaluated as an inner product so it stays
      // meaningful when the step is tiny; clamped so evaluation noise
      // cannot tick the recorded trace upward
      Vector d = cand - state.X_hat.col(j);
      double delta = tj * d.dot(r_j - tj * 0.5 * (cand + state.X_hat.col(j)));
      state.X_hat.col(j) = cand;
      residual = r_j - tj * cand;
      obj -= std::max(delta, 0.0);
      if (cfg.block_observer) cfg.block_observer(round, j, state.X_hat);
    }
    if (cfg.track_objective) state.objective_history.push_back(obj);
    state.rounds_run = round;
    if (cfg.rel_tol > 0 &&
        obj_prev - obj < cfg.rel_tol * std::max(1.0, obj_prev))
      break;
  }
  return state;
}

} // namespace slim::cpav
