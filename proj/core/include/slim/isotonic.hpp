#pragma once

#include <utility>
#include <vector>

#include "slim/types.hpp"

namespace slim::isotonic {

// Sort permutation and exact-equality tie runs of the inducing column x.
// The cone M(x) = {v : v_i >= v_j iff x_i >= x_j} forces equality on ties.
struct MonotoneOrder {
  std::vector<int> perm;                        // stable ascending sort of x
  std::vector<std::pair<int, int>> groups;      // [begin, end) runs in perm
};

struct ProjectionResult {
  Vector value;
  double kkt_gap = 0.0;
};

MonotoneOrder monotone_order(const Vector& x);

// Euclidean projection onto M(x): tie groups pooled to their mean, then
// pool-adjacent-violators over the sorted sequence, unpermuted back.
Vector pava(const Vector& z, const MonotoneOrder& order);

// P_L: subtract the mean.
Vector project_centering(const Vector& z);

// P_B: scale onto the radius-sqrt(n) ball iff outside it.
Vector project_ball(const Vector& z);

// P_{M cap L cap B} computed as P_B(P_L(P_M(z))).
ProjectionResult standardized_isotonic(const Vector& z,
                                       const MonotoneOrder& order);

// Alternating projections over {M, L, B} with correction vectors; the
// slow-but-sure reference for the composed closed form.
struct DykstraResult {
  Vector value;
  bool converged = false;
  int cycles = 0;
};

DykstraResult dykstra_oracle(const Vector& z, const MonotoneOrder& order,
                             double tol = 1e-10, int max_cycles = 10000);

// Max KKT violation of v as the projection of z onto M(x): stationarity
// against the cone's generators plus complementary slackness.
double pava_kkt_gap(const Vector& z, const Vector& v,
                    const MonotoneOrder& order);

} // namespace slim::isotonic
