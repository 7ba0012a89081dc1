#pragma once

#include <cstdint>

#include "slim/types.hpp"

namespace slim::dantzig {

struct KdsProblem {
  Matrix Q;      // p x p, symmetric
  Vector r;      // length p
  double gamma;  // >= 0
};

enum class SolveStatus { converged, max_iterations, infeasible };

struct KdsSolution {
  Vector theta_check;
  double objective = 0.0;     // l1 norm attained
  double residual_inf = 0.0;  // ||Q theta - r||_inf
  int iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::converged;
};

struct SolverConfig {
  int max_iterations = 5000;
  double abs_tol = 1e-7;   // primal/dual residual stopping
  double feas_tol = 1e-6;  // slack allowed in the reported solution
  double penalty = 1.0;    // initial ADMM penalty, adapted by balancing
  std::uint64_t rng_seed = 0;  // reserved; default path uses no randomness
  Vector warm_start;  // optional initial iterate (empty = start from zero);
                      // pays off when sweeping a gamma grid
};

// min ||theta||_1  s.t.  ||Q theta - r||_inf <= gamma.
// Consensus ADMM on the splits x = theta, z = Q theta - r (one cached
// factorization of I + Q'Q) with an active-set polish; falls back to a
// linearized update for large p so Q is never factorized there.
// Deterministic from theta = 0, or from cfg.warm_start when given.
KdsSolution solve_kds(const KdsProblem& prob, const SolverConfig& cfg = {});

// Exact optimum by basic-feasible-solution enumeration; p <= 6 only.
KdsSolution lp_oracle(const KdsProblem& prob);

double residual_inf_norm(const Matrix& Q, const Vector& theta,
                         const Vector& r);

} // namespace slim::dantzig
