#pragma once

#include <cstdint>

#include "slim/types.hpp"

namespace slim::rank_corr {

// T_hat, b_hat and their entrywise sine transforms: the plug-in
// replacements for X'X/n and X'y/n built from rank statistics.
struct RankCorrelation {
  Matrix tau_matrix;  // T_hat, p x p
  Matrix sigma_hat;   // sin(pi/2 * T_hat)
  Vector b_hat;       // column-vs-response taus
  Vector beta_hat;    // sin(pi/2 * b_hat)
};

// tau-a: sum over ordered pairs of sign((u_k-u_k')(v_k-v_k')) / (n(n-1)).
// sign(0) = 0, no tie correction in the denominator.
// O(n log n) via merge-sort inversion counting; matches the O(n^2)
// definition exactly.
double kendall_tau_pair(const Vector& u, const Vector& v);

Matrix kendall_matrix(const Matrix& X, int workers = 0);
Vector kendall_vector(const Matrix& X, const Vector& y, int workers = 0);

// sin(pi t / 2). Inputs in (1, 1+1e-12] clamp to 1 (resp. -1); anything
// further out throws.
double sine_transform(double t);
Matrix sine_transform(const Matrix& T);
Vector sine_transform(const Vector& t);

RankCorrelation estimate(const Matrix& X, const Vector& y, int workers = 0);

// min over `trials` random s-sparse unit vectors v of v' Sigma v.
// Upper-bounds the true restricted minimum; diagnostic only.
double re_diagnostic(const Matrix& sigma, int s, int trials,
                     std::uint64_t rng_seed);

} // namespace slim::rank_corr
