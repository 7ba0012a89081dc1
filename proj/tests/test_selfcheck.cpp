#include "doctest.h"
#include "slim/isotonic.hpp"
#include "slim/selfcheck.hpp"

using slim::Vector;
namespace sc = slim::selfcheck;

TEST_SUITE("selfcheck") {

TEST_CASE("reference kendall on tiny inputs") {
  Vector a(3), b(3);
  a << 1, 2, 3;
  b << 1, 2, 3;
  CHECK(sc::kendall_naive(a, b) == 1.0);
  b << 3, 2, 1;
  CHECK(sc::kendall_naive(a, b) == -1.0);
  a << 1, 1, 2;
  b << 5, 6, 7;
  CHECK(sc::kendall_naive(a, b) == 4.0 / 6.0);
}

TEST_CASE("reference pava pools violations") {
  Vector x(3), z(3);
  x << 1, 2, 3;
  z << 3, 1, 2;
  auto ord = slim::isotonic::monotone_order(x);
  Vector v = sc::pava_naive(z, ord);
  CHECK(v(0) == 2.0);
  CHECK(v(1) == 2.0);
  CHECK(v(2) == 2.0);
}

TEST_CASE("all suites pass") {
  auto results = sc::run_all(42);
  REQUIRE(results.size() == 3);
  for (const auto& r : results) {
    INFO(r.name);
    for (const auto& m : r.messages) MESSAGE(m);
    CHECK(r.ok());
    CHECK(r.cases > 0);
  }
  CHECK(results[0].name == "kendall");
  CHECK(results[1].name == "projection");
  CHECK(results[2].name == "lp");
}

TEST_CASE("seeds shift the generated cases but not the verdict") {
  auto a = sc::check_kendall(1, 50);
  auto b = sc::check_kendall(2, 50);
  CHECK(a.ok());
  CHECK(b.ok());
  auto lp = sc::check_lp(9, 40);
  for (const auto& m : lp.messages) MESSAGE(m);
  CHECK(lp.ok());
  auto t3 = sc::check_projection(5, 60);
  CHECK(t3.ok());
}

} // TEST_SUITE
