#include "slim/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "slim/rng.hpp"

namespace slim::synth {

namespace {

constexpr std::uint64_t kCovStream = 0xc0;
constexpr std::uint64_t kLatentStream = 0x1a;
constexpr std::uint64_t kNoiseStream = 0x0e;
constexpr std::uint64_t kThetaStream = 0x7a;
constexpr std::uint64_t kAssignStream = 0xa5;

const std::array<std::string, kTransformCount> kNames = {
    "cube",      "signed_sqrt", "exp",   "gauss_cdf",  "exp_sqrt",
    "log_scale", "sigmoid",     "shift", "signed_log", "softplus"};

} // namespace

const std::string& transform_name(TransformKind kind) {
  return kNames.at(static_cast<std::size_t>(kind));
}

std::optional<TransformKind> transform_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<TransformKind>(i);
  return std::nullopt;
}

Matrix make_covariance(int p, std::uint64_t rng_seed) {
  if (p < 1) throw std::invalid_argument("make_covariance: p >= 1");
  auto eng = rng::engine(rng_seed, kCovStream);
  std::normal_distribution<double> gauss;
  Matrix A(p, p);
  for (int i = 0; i < p; ++i) {
    double nrm = 0.0;
    do {
      for (int j = 0; j < p; ++j) A(i, j) = gauss(eng);
      nrm = A.row(i).norm();
    } while (nrm < 1e-30);
    A.row(i) /= nrm;
  }
  Matrix sigma = A * A.transpose();
  sigma.diagonal().setOnes();
  return sigma;
}

Matrix sample_latent(const Matrix& sigma_tilde, int n,
                     std::uint64_t rng_seed) {
  long p = sigma_tilde.rows();
  if (sigma_tilde.cols() != p)
    throw std::invalid_argument("sample_latent: covariance not square");
  if (n < 0) throw std::invalid_argument("sample_latent: n >= 0");

  Eigen::LLT<Matrix> llt(sigma_tilde);
  if (llt.info() != Eigen::Success) {
    for (double jitter : {1e-12, 1e-11, 1e-10}) {
      Matrix shifted = sigma_tilde;
      shifted.diagonal().array() += jitter;
      llt.compute(shifted);
      if (llt.info() == Eigen::Success) break;
    }
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("sample_latent: covariance is not PSD");
  }
  Matrix L = llt.matrixL();

  auto eng = rng::engine(rng_seed, kLatentStream);
  std::normal_distribution<double> gauss;
  Matrix Z(n, p);
  for (int i = 0; i < n; ++i)  // row-major fill: prefixes nest across n
    for (long j = 0; j < p; ++j) Z(i, j) = gauss(eng);
  return Z * L.transpose();
}

double apply_transform(TransformKind kind, double v) {
  if (!std::isfinite(v))
    throw std::invalid_argument("apply_transform: non-finite input");
  switch (kind) {
    case TransformKind::cube:
      return v * v * v;
    case TransformKind::signed_sqrt:
      return std::copysign(std::sqrt(std::abs(v)), v);
    case TransformKind::exponential:
      return std::exp(std::min(v, 700.0));
    case TransformKind::gauss_cdf:
      return 0.5 * std::erfc(-v / std::numbers::sqrt2);
    case TransformKind::exp_sqrt:
      return v * std::exp(std::min(std::sqrt(std::abs(v)), 700.0));
    case TransformKind::log_scale:
      return v * std::log(std::abs(v) + 1.0);
    case TransformKind::sigmoid:
      if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
      return std::exp(v) / (1.0 + std::exp(v));
    case TransformKind::shift:
      return v - 1.0;
    case TransformKind::signed_log:
      return std::copysign(std::log1p(std::abs(v)), v);
    case TransformKind::softplus:
      return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
  }
  throw std::invalid_argument("apply_transform: unknown kind");
}

double GroundTruth::sigma_y() const {
  double var = theta_tilde.dot(sigma_tilde * theta_tilde) + noise_variance;
  return std::sqrt(var);
}

Vector GroundTruth::beta() const {
  return sigma_tilde * theta_tilde / sigma_y();
}

Dataset gen_dataset(const GeneratorConfig& cfg) {
  if (cfg.p < 1) throw std::invalid_argument("gen_dataset: p >= 1");
  if (cfg.s < 1 || cfg.s > cfg.p)
    throw std::invalid_argument("gen_dataset: need 1 <= s <= p");
  if (cfg.n < 0) throw std::invalid_argument("gen_dataset: n >= 0");
  if (cfg.noise_variance < 0)
    throw std::invalid_argument("gen_dataset: noise_variance >= 0");
  if (!(cfg.theta_magnitude > 0))
    throw std::invalid_argument("gen_dataset: theta_magnitude > 0");

  Dataset ds;
  GroundTruth& gt = ds.truth;
  gt.noise_variance = cfg.noise_variance;
  gt.seed = cfg.rng_seed;
  gt.sigma_tilde = make_covariance(cfg.p, cfg.rng_seed);

  // support: partial Fisher-Yates; signs: one draw per support coordinate
  auto theta_eng = rng::engine(cfg.rng_seed, kThetaStream);
  std::vector<int> coords(cfg.p);
  std::iota(coords.begin(), coords.end(), 0);
  for (int k = 0; k < cfg.s; ++k) {
    std::uniform_int_distribution<int> pick(k, cfg.p - 1);
    std::swap(coords[k], coords[pick(theta_eng)]);
  }
  std::vector<int> support(coords.begin(), coords.begin() + cfg.s);
  std::sort(support.begin(), support.end());
  gt.theta_tilde = Vector::Zero(cfg.p);
  std::uniform_int_distribution<int> flip(0, 1);
  for (int j : support)
    gt.theta_tilde(j) = flip(theta_eng) ? cfg.theta_magnitude
                                        : -cfg.theta_magnitude;

  gt.transform_ids.resize(cfg.p);
  if (cfg.force_transform) {
    std::fill(gt.transform_ids.begin(), gt.transform_ids.end(),
              *cfg.force_transform);
  } else {
    // active features walk the table in order; inactive ones draw from an
    // independent stream
    auto assign_eng = rng::engine(cfg.rng_seed, kAssignStream);
    std::uniform_int_distribution<int> any(0, kTransformCount - 1);
    std::vector<char> is_active(cfg.p, 0);
    for (int k = 0; k < cfg.s; ++k) {
      gt.transform_ids[support[k]] =
          static_cast<TransformKind>(k % kTransformCount);
      is_active[support[k]] = 1;
    }
    for (int j = 0; j < cfg.p; ++j)
      if (!is_active[j])
        gt.transform_ids[j] = static_cast<TransformKind>(any(assign_eng));
  }

  gt.x_tilde = sample_latent(gt.sigma_tilde, cfg.n, cfg.rng_seed);

  ds.y = gt.x_tilde * gt.theta_tilde;
  if (cfg.noise_variance > 0) {
    auto noise_eng = rng::engine(cfg.rng_seed, kNoiseStream);
    std::normal_distribution<double> gauss(0.0,
                                           std::sqrt(cfg.noise_variance));
    for (int i = 0; i < cfg.n; ++i) ds.y(i) += gauss(noise_eng);
  }

  ds.X.resize(cfg.n, cfg.p);
  for (int j = 0; j < cfg.p; ++j)
    for (int i = 0; i < cfg.n; ++i)
      ds.X(i, j) = apply_transform(gt.transform_ids[j], gt.x_tilde(i, j));
  return ds;
}

} // namespace slim::synth
