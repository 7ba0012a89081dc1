#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slim/types.hpp"

namespace slim::synth {

// The ten inverse-transform shapes, all strictly increasing on R.
enum class TransformKind {
  cube,         // x^3
  signed_sqrt,  // sign(x) sqrt(|x|)
  exponential,  // exp(x)
  gauss_cdf,    // Phi(x)
  exp_sqrt,     // x exp(sqrt(|x|))
  log_scale,    // x log(|x|+1)
  sigmoid,      // 1/(1+exp(-x))
  shift,        // x - 1
  signed_log,   // sign(x) log(|x|+1)
  softplus,     // log(exp(x)+1)
};

inline constexpr int kTransformCount = 10;

const std::string& transform_name(TransformKind kind);
std::optional<TransformKind> transform_from_name(const std::string& name);

struct GeneratorConfig {
  int p = 500;
  int s = 10;
  int n = 0;
  double noise_variance = 0.25;
  double theta_magnitude = 1.0;  // nonzeros are +-theta_magnitude
  std::uint64_t rng_seed = 0;
  // when set, every feature uses this transform instead of the Table-1
  // assignment (active: first s kinds in order; inactive: random kinds)
  std::optional<TransformKind> force_transform;
};

struct GroundTruth {
  Matrix sigma_tilde;
  Vector theta_tilde;
  Matrix x_tilde;
  std::vector<TransformKind> transform_ids;
  double noise_variance = 0.0;
  std::uint64_t seed = 0;

  double sigma_y() const;  // sqrt(theta' Sigma theta + noise_variance)
  Vector beta() const;     // Sigma theta / sigma_y
};

struct Dataset {
  Matrix X;
  Vector y;
  GroundTruth truth;
};

// A is p x p standard Gaussian with rows normalized to unit length;
// returns A A' (unit diagonal, PSD).
Matrix make_covariance(int p, std::uint64_t rng_seed);

// Rows i.i.d. N(0, Sigma) via Cholesky; diagonal jitter up to 1e-10 if the
// factorization needs it. Z is filled row by row, so growing n extends the
// sample instead of reshuffling it.
Matrix sample_latent(const Matrix& sigma_tilde, int n, std::uint64_t rng_seed);

double apply_transform(TransformKind kind, double v);

Dataset gen_dataset(const GeneratorConfig& cfg);

} // namespace slim::synth
