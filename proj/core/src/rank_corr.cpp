#include "slim/rank_corr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "slim/parallel.hpp"
#include "slim/rng.hpp"

namespace slim::rank_corr {

namespace {

void require_finite(const double* v, long n, const char* what) {
  for (long i = 0; i < n; ++i)
    if (!std::isfinite(v[i]))
      throw std::invalid_argument(std::string(what) +
                                  " has a non-finite entry");
}

// Inversions (strict) of v by merge sort; v is sorted in place.
long long count_inversions(std::vector<double>& v, std::vector<double>& tmp,
                           long lo, long hi) {
  if (hi - lo < 2) return 0;
  long mid = lo + (hi - lo) / 2;
  long long inv = count_inversions(v, tmp, lo, mid) +
                  count_inversions(v, tmp, mid, hi);
  long i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {  // equal values take the left side: not an inversion
      inv += mid - i;
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return inv;
}

double kendall_kernel(const double* u, const double* v, long n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (u[a] != u[b]) return u[a] < u[b];
    return v[a] < v[b];
  });

  // tied pairs in u, and in (u, v) jointly, over the u-sorted sequence
  long long t_u = 0, t_uv = 0;
  for (long i = 0; i < n;) {
    long j = i;
    while (j < n && u[idx[j]] == u[idx[i]]) ++j;
    long long run = j - i;
    t_u += run * (run - 1) / 2;
    for (long a = i; a < j;) {
      long b = a;
      while (b < j && v[idx[b]] == v[idx[a]]) ++b;
      long long vrun = b - a;
      t_uv += vrun * (vrun - 1) / 2;
      a = b;
    }
    i = j;
  }

  std::vector<double> vs(n), tmp(n);
  for (long i = 0; i < n; ++i) vs[i] = v[idx[i]];
  long long discordant = count_inversions(vs, tmp, 0, n);

  long long t_v = 0;  // vs is now fully sorted
  for (long i = 0; i < n;) {
    long j = i;
    while (j < n && vs[j] == vs[i]) ++j;
    long long run = j - i;
    t_v += run * (run - 1) / 2;
    i = j;
  }

  long long n0 = static_cast<long long>(n) * (n - 1) / 2;
  long long s = n0 - t_u - t_v + t_uv - 2 * discordant;
  return static_cast<double>(s) / static_cast<double>(n0);
}

} // namespace

double kendall_tau_pair(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("kendall_tau_pair: length mismatch");
  if (u.size() < 2)
    throw std::invalid_argument("kendall_tau_pair: need at least 2 samples");
  require_finite(u.data(), u.size(), "u");
  require_finite(v.data(), v.size(), "v");
  return kendall_kernel(u.data(), v.data(), u.size());
}

Matrix kendall_matrix(const Matrix& X, int workers) {
  long n = X.rows(), p = X.cols();
  if (n < 2) throw std::invalid_argument("kendall_matrix: need n >= 2");
  if (p < 1) throw std::invalid_argument("kendall_matrix: need p >= 1");
  require_finite(X.data(), n * p, "X");

  std::vector<std::pair<int, int>> tasks;
  tasks.reserve(p * (p + 1) / 2);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) tasks.emplace_back(i, j);

  Matrix T(p, p);
  parallel_for(tasks.size(), workers, [&](std::size_t k) {
    auto [i, j] = tasks[k];
    double t = kendall_kernel(X.col(i).data(), X.col(j).data(), n);
    T(i, j) = t;
    T(j, i) = t;
  });
  return T;
}

Vector kendall_vector(const Matrix& X, const Vector& y, int workers) {
  long n = X.rows(), p = X.cols();
  if (y.size() != n)
    throw std::invalid_argument("kendall_vector: dimension mismatch");
  if (n < 2) throw std::invalid_argument("kendall_vector: need n >= 2");
  require_finite(X.data(), n * p, "X");
  require_finite(y.data(), n, "y");

  Vector b(p);
  parallel_for(p, workers, [&](std::size_t j) {
    b(j) = kendall_kernel(X.col(j).data(), y.data(), n);
  });
  return b;
}

double sine_transform(double t) {
  if (!(std::abs(t) <= 1.0 + 1e-12))
    throw std::invalid_argument("sine_transform: input outside [-1, 1]");
  t = std::clamp(t, -1.0, 1.0);
  return std::sin(std::numbers::pi / 2.0 * t);
}

Matrix sine_transform(const Matrix& T) {
  Matrix S(T.rows(), T.cols());
  for (long j = 0; j < T.cols(); ++j)
    for (long i = 0; i < T.rows(); ++i) S(i, j) = sine_transform(T(i, j));
  return S;
}

Vector sine_transform(const Vector& t) {
  Vector s(t.size());
  for (long i = 0; i < t.size(); ++i) s(i) = sine_transform(t(i));
  return s;
}

RankCorrelation estimate(const Matrix& X, const Vector& y, int workers) {
  RankCorrelation rc;
  rc.tau_matrix = kendall_matrix(X, workers);
  rc.b_hat = kendall_vector(X, y, workers);
  rc.sigma_hat = sine_transform(rc.tau_matrix);
  rc.beta_hat = sine_transform(rc.b_hat);
  return rc;
}

double re_diagnostic(const Matrix& sigma, int s, int trials,
                     std::uint64_t rng_seed) {
  long p = sigma.rows();
  if (sigma.cols() != p)
    throw std::invalid_argument("re_diagnostic: matrix not square");
  if (s < 1 || s > p)
    throw std::invalid_argument("re_diagnostic: need 1 <= s <= p");
  if (trials < 1) throw std::invalid_argument("re_diagnostic: trials >= 1");

  auto eng = rng::engine(rng_seed, 0x7e);
  std::normal_distribution<double> gauss;
  std::vector<int> coords(p);
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    std::iota(coords.begin(), coords.end(), 0);
    for (int k = 0; k < s; ++k) {
      std::uniform_int_distribution<int> pick(k, static_cast<int>(p) - 1);
      std::swap(coords[k], coords[pick(eng)]);
    }
    Vector vals(s);
    double nrm = 0.0;
    do {
      for (int k = 0; k < s; ++k) vals(k) = gauss(eng);
      nrm = vals.norm();
    } while (nrm == 0.0);
    vals /= nrm;
    double quad = 0.0;
    for (int a = 0; a < s; ++a)
      for (int b = 0; b < s; ++b)
        quad += vals(a) * vals(b) * sigma(coords[a], coords[b]);
    best = std::min(best, quad);
  }
  return best;
}

} // namespace slim::rank_corr
