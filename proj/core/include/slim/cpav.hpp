#pragma once

#include <functional>
#include <vector>

#include "slim/isotonic.hpp"
#include "slim/types.hpp"

namespace slim::cpav {

struct BackfitConfig {
  int rounds = 100;
  double rel_tol = 1e-8;  // early stop on per-round objective decrease;
                          // 0 disables it (fixed round count)
  bool track_objective = true;
  // test hook, called after every block update with (round, j, X_hat)
  std::function<void(int, int, const Matrix&)> block_observer;
};

struct BackfitState {
  Matrix X_hat;
  std::vector<double> objective_history;  // l(X_hat) per round, leading entry
                                          // is the initial objective
  std::vector<int> active_set;
  int rounds_run = 0;
};

// Gauss-Seidel residue for the j-th block: columns before j from the
// current round's iterate, columns after j from the previous round's.
Vector residue(const Vector& y, const Vector& theta_hat,
               const Matrix& X_current, const Matrix& X_previous, int j);

// Standardized isotonic fit of one block: P(r_j / theta_j) over the cone
// of x^j. Negative theta_j realizes a decreasing fit.
Vector block_update(const Vector& r_j, double theta_j,
                    const isotonic::MonotoneOrder& order_j);

// Cyclic backfitting over the active blocks, X_hat(0) = 0. A block's
// candidate is kept only if it does not increase 1/2 ||X theta - y||^2 as
// evaluated in floats, so the recorded objective never ticks up.
BackfitState estimate_hidden_design(const Vector& y, const Matrix& X,
                                    const Vector& theta_hat,
                                    const BackfitConfig& cfg = {});

} // namespace slim::cpav
