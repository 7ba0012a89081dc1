#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "slim/isotonic.hpp"
#include "slim/rng.hpp"
#include "slim/selfcheck.hpp"

using slim::Vector;
namespace iso = slim::isotonic;

namespace {

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

Vector random_vec(std::mt19937_64& gen, int n, bool ties) {
  std::normal_distribution<double> gauss;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = gauss(gen);
  if (ties)
    for (int i = 1; i < n; ++i)
      if (gen() % 4 == 0) v(i) = v(static_cast<int>(gen() % i));
  return v;
}

bool in_cone(const Vector& v, const iso::MonotoneOrder& ord, double tol) {
  for (std::size_t k = 0; k + 1 < ord.perm.size(); ++k)
    if (v(ord.perm[k + 1]) < v(ord.perm[k]) - tol) return false;
  for (auto [b, e] : ord.groups)
    for (int k = b + 1; k < e; ++k)
      if (v(ord.perm[k]) != v(ord.perm[b])) return false;
  return true;
}

} // namespace

TEST_SUITE("isotonic") {

TEST_CASE("monotone order permutation and tie groups") {
  auto ord = iso::monotone_order(vec3(3, 1, 2));
  CHECK(ord.perm == std::vector<int>{1, 2, 0});
  REQUIRE(ord.groups.size() == 3);
  CHECK(ord.groups[0] == std::pair<int, int>{0, 1});
  CHECK(ord.groups[1] == std::pair<int, int>{1, 2});
  CHECK(ord.groups[2] == std::pair<int, int>{2, 3});

  auto tied = iso::monotone_order(vec3(5, 5, 5));
  CHECK(tied.groups.size() == 1);
  CHECK(tied.groups[0] == std::pair<int, int>{0, 3});

  auto mixed = iso::monotone_order(vec3(2, 1, 2));
  CHECK(mixed.perm == std::vector<int>{1, 0, 2});
  REQUIRE(mixed.groups.size() == 2);
  CHECK(mixed.groups[0] == std::pair<int, int>{0, 1});
  CHECK(mixed.groups[1] == std::pair<int, int>{1, 3});

  Vector bad(2);
  bad << 1, std::nan("");
  CHECK_THROWS_AS(iso::monotone_order(bad), std::invalid_argument);
}

TEST_CASE("pava on small inputs") {
  Vector x = vec3(1, 2, 3);
  auto ord = iso::monotone_order(x);
  Vector z = vec3(1, 2, 3);
  Vector v = iso::pava(z, ord);
  CHECK((v.array() == z.array()).all());

  v = iso::pava(vec3(3, 1, 2), ord);
  CHECK(v(0) == 2.0);
  CHECK(v(1) == 2.0);
  CHECK(v(2) == 2.0);

  Vector x2(2), z2(2);
  x2 << 7, 7;
  z2 << 10, 0;
  Vector v2 = iso::pava(z2, iso::monotone_order(x2));
  CHECK(v2(0) == 5.0);
  CHECK(v2(1) == 5.0);
}

TEST_CASE("pava equals the repeated-merge reference") {
  auto gen = slim::rng::engine(21, 201);
  for (int c = 0; c < 300; ++c) {
    int n = 1 + static_cast<int>(gen() % 30);
    Vector x = random_vec(gen, n, true);
    Vector z = random_vec(gen, n, c % 5 == 0);
    auto ord = iso::monotone_order(x);
    Vector fast = iso::pava(z, ord);
    Vector slow = slim::selfcheck::pava_naive(z, ord);
    CHECK((fast.array() == slow.array()).all());
    CHECK(in_cone(fast, ord, 1e-12));
    CHECK(iso::pava_kkt_gap(z, fast, ord) <= 1e-8);
  }
}

TEST_CASE("pava is non-expansive and idempotent") {
  auto gen = slim::rng::engine(22, 202);
  for (int c = 0; c < 100; ++c) {
    int n = 2 + static_cast<int>(gen() % 20);
    Vector x = random_vec(gen, n, true);
    auto ord = iso::monotone_order(x);
    Vector z1 = random_vec(gen, n, false);
    Vector z2 = random_vec(gen, n, false);
    Vector p1 = iso::pava(z1, ord);
    Vector p2 = iso::pava(z2, ord);
    CHECK((p1 - p2).norm() <= (z1 - z2).norm() + 1e-8);
    CHECK((iso::pava(p1, ord) - p1).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("centering projection") {
  Vector v = iso::project_centering(vec3(1, 2, 3));
  CHECK(v(0) == -1.0);
  CHECK(v(1) == 0.0);
  CHECK(v(2) == 1.0);

  Vector one(1);
  one << 5;
  CHECK(iso::project_centering(one)(0) == 0.0);

  auto gen = slim::rng::engine(23, 203);
  Vector z = random_vec(gen, 50, false);
  Vector c = iso::project_centering(z);
  CHECK(std::abs(c.sum()) <= 1e-12 * 50);
  CHECK((c - z).norm() <= (z.array() - z.mean()).matrix().norm() + 1e-12);
}

TEST_CASE("ball projection") {
  Vector inside = vec3(0.5, -0.5, 0.1);
  Vector v = iso::project_ball(inside);
  CHECK((v.array() == inside.array()).all());

  Vector out = vec3(3, 0, 0);
  Vector w = iso::project_ball(out);
  CHECK(w(0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(w(1) == 0.0);
  CHECK(w(2) == 0.0);
  CHECK(w.norm() <= std::sqrt(3.0) + 1e-12);

  Vector zero = Vector::Zero(4);
  CHECK(iso::project_ball(zero).isZero(0.0));
}

TEST_CASE("standardized projection on small inputs") {
  auto ord = iso::monotone_order(vec3(1, 2, 3));
  auto res = iso::standardized_isotonic(vec3(3, 1, 2), ord);
  CHECK(res.value(0) == 0.0);
  CHECK(res.value(1) == 0.0);
  CHECK(res.value(2) == 0.0);

  // already centered, isotonic, inside the ball: fixed point
  Vector member = vec3(-1, 0, 1);
  auto fixed = iso::standardized_isotonic(member, ord);
  CHECK((fixed.value.array() == member.array()).all());
  CHECK(fixed.kkt_gap <= 1e-8);
}

TEST_CASE("standardized projection invariants") {
  auto gen = slim::rng::engine(24, 204);
  for (int c = 0; c < 200; ++c) {
    int n = 2 + static_cast<int>(gen() % 30);
    Vector x = random_vec(gen, n, c % 2 == 0);
    auto ord = iso::monotone_order(x);
    double scale = (c % 3 == 0) ? 10.0 : (c % 3 == 1 ? 0.1 : 1.0);
    Vector z = scale * random_vec(gen, n, false);
    auto res = iso::standardized_isotonic(z, ord);
    CHECK(in_cone(res.value, ord, 1e-12));
    CHECK(std::abs(res.value.mean()) <= 1e-8);
    CHECK(res.value.norm() <= std::sqrt(double(n)) + 1e-8);
    CHECK(res.kkt_gap <= 1e-8);

    auto twice = iso::standardized_isotonic(res.value, ord);
    CHECK((twice.value - res.value).lpNorm<Eigen::Infinity>() <= 1e-8);

    Vector z2 = random_vec(gen, n, false);
    auto res2 = iso::standardized_isotonic(z2, ord);
    CHECK((res.value - res2.value).norm() <= (z - z2).norm() + 1e-8);
  }
}

TEST_CASE("standardized projection matches the alternating oracle") {
  auto gen = slim::rng::engine(25, 205);
  for (int c = 0; c < 100; ++c) {
    int n = 2 + static_cast<int>(gen() % 25);
    Vector x = random_vec(gen, n, c % 2 == 0);
    auto ord = iso::monotone_order(x);
    Vector z = (c % 2 ? 5.0 : 0.5) * random_vec(gen, n, false);
    auto fast = iso::standardized_isotonic(z, ord);
    auto slow = iso::dykstra_oracle(z, ord, 1e-10);
    REQUIRE(slow.converged);
    CHECK((fast.value - slow.value).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("length mismatches throw") {
  auto ord = iso::monotone_order(vec3(1, 2, 3));
  Vector z(2);
  z << 1, 2;
  CHECK_THROWS_AS(iso::pava(z, ord), std::invalid_argument);
  CHECK_THROWS_AS(iso::standardized_isotonic(z, ord), std::invalid_argument);
}

} // TEST_SUITE
