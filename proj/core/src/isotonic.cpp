#include "slim/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace slim::isotonic {

namespace {

struct Block {
  long start;  // first sorted position covered
  double sum;
  long count;
  double mean() const { return sum / static_cast<double>(count); }
};

void check_lengths(const Vector& z, const MonotoneOrder& order,
                   const char* where) {
  if (static_cast<std::size_t>(z.size()) != order.perm.size())
    throw std::invalid_argument(std::string(where) + ": length mismatch");
}

} // namespace

MonotoneOrder monotone_order(const Vector& x) {
  long n = x.size();
  for (long i = 0; i < n; ++i)
    if (!std::isfinite(x(i)))
      throw std::invalid_argument("monotone_order: non-finite entry");

  MonotoneOrder order;
  order.perm.resize(n);
  std::iota(order.perm.begin(), order.perm.end(), 0);
  std::stable_sort(order.perm.begin(), order.perm.end(),
                   [&](int a, int b) { return x(a) < x(b); });
  for (long i = 0; i < n;) {
    long j = i;
    while (j < n && x(order.perm[j]) == x(order.perm[i])) ++j;
    order.groups.emplace_back(static_cast<int>(i), static_cast<int>(j));
    i = j;
  }
  return order;
}

Vector pava(const Vector& z, const MonotoneOrder& order) {
  check_lengths(z, order, "pava");
  long n = z.size();
  if (n == 0) return z;

  // one pooled block per tie group, then pool adjacent violators
  std::vector<Block> stack;
  stack.reserve(order.groups.size());
  for (const auto& [gb, ge] : order.groups) {
    double sum = 0.0;
    for (int k = gb; k < ge; ++k) sum += z(order.perm[k]);
    stack.push_back({gb, sum, ge - gb});
    while (stack.size() > 1 &&
           stack[stack.size() - 2].mean() > stack.back().mean()) {
      Block top = stack.back();
      stack.pop_back();
      stack.back().sum += top.sum;
      stack.back().count += top.count;
    }
  }

  // final values from a fresh in-order sum per block, so the result does
  // not depend on the merge history
  Vector out(n);
  for (std::size_t b = 0; b < stack.size(); ++b) {
    long lo = stack[b].start;
    long hi = b + 1 < stack.size() ? stack[b + 1].start : n;
    double sum = 0.0;
    for (long k = lo; k < hi; ++k) sum += z(order.perm[k]);
    double value = sum / static_cast<double>(hi - lo);
    for (long k = lo; k < hi; ++k) out(order.perm[k]) = value;
  }
  return out;
}

Vector project_centering(const Vector& z) {
  if (z.size() == 0) return z;
  return z.array() - z.mean();
}

Vector project_ball(const Vector& z) {
  if (z.size() == 0) return z;
  double radius = std::sqrt(static_cast<double>(z.size()));
  double nrm = z.norm();
  if (nrm <= radius) return z;
  return z * (radius / nrm);
}

ProjectionResult standardized_isotonic(const Vector& z,
                                       const MonotoneOrder& order) {
  check_lengths(z, order, "standardized_isotonic");
  ProjectionResult res;
  res.value = project_ball(project_centering(pava(z, order)));
  long n = res.value.size();
  if (n == 0) return res;

  // post-hoc membership violation of the returned point
  double gap = 0.0;
  const Vector& v = res.value;
  for (std::size_t g = 0; g < order.groups.size(); ++g) {
    auto [gb, ge] = order.groups[g];
    for (int k = gb + 1; k < ge; ++k)
      gap = std::max(gap, std::abs(v(order.perm[k]) - v(order.perm[gb])));
    if (g + 1 < order.groups.size()) {
      int nb = order.groups[g + 1].first;
      gap = std::max(gap, v(order.perm[ge - 1]) - v(order.perm[nb]));
    }
  }
  gap = std::max(gap, std::abs(v.mean()));
  gap = std::max(gap, v.norm() - std::sqrt(static_cast<double>(n)));
  res.kkt_gap = std::max(gap, 0.0);
  return res;
}

DykstraResult dykstra_oracle(const Vector& z, const MonotoneOrder& order,
                             double tol, int max_cycles) {
  check_lengths(z, order, "dykstra_oracle");
  if (tol <= 0) throw std::invalid_argument("dykstra_oracle: tol > 0");

  DykstraResult res;
  Vector x = z;
  Vector p1 = Vector::Zero(z.size());
  Vector p2 = p1, p3 = p1;
  for (int cycle = 1; cycle <= max_cycles; ++cycle) {
    Vector prev = x;
    Vector y = pava(x + p1, order);
    p1 = x + p1 - y;
    x = y;
    y = project_centering(x + p2);
    p2 = x + p2 - y;
    x = y;
    y = project_ball(x + p3);
    p3 = x + p3 - y;
    x = y;
    res.cycles = cycle;
    if ((x - prev).cwiseAbs().maxCoeff() < tol) {
      res.converged = true;
      break;
    }
  }
  res.value = x;
  return res;
}

double pava_kkt_gap(const Vector& z, const Vector& v,
                    const MonotoneOrder& order) {
  check_lengths(z, order, "pava_kkt_gap");
  if (z.size() != v.size())
    throw std::invalid_argument("pava_kkt_gap: length mismatch");
  long n = z.size();
  if (n == 0) return 0.0;

  double gap = 0.0;
  // membership of v in the cone
  for (std::size_t g = 0; g < order.groups.size(); ++g) {
    auto [gb, ge] = order.groups[g];
    for (int k = gb + 1; k < ge; ++k)
      gap = std::max(gap, std::abs(v(order.perm[k]) - v(order.perm[gb])));
    if (g + 1 < order.groups.size()) {
      int nb = order.groups[g + 1].first;
      gap = std::max(gap, v(order.perm[ge - 1]) - v(order.perm[nb]));
    }
  }

  // z - v in the polar cone: orthogonal to the constant direction, and
  // non-positive against every suffix-of-groups indicator
  Vector d = z - v;
  gap = std::max(gap, std::abs(d.sum()) / static_cast<double>(n));
  double suffix = 0.0;
  for (std::size_t g = order.groups.size(); g-- > 1;) {
    auto [gb, ge] = order.groups[g];
    for (int k = gb; k < ge; ++k) suffix += d(order.perm[k]);
    gap = std::max(gap, suffix / static_cast<double>(n));
  }
  // complementary slackness
  gap = std::max(gap, std::abs(d.dot(v)) / static_cast<double>(n));
  return gap;
}

} // namespace slim::isotonic
