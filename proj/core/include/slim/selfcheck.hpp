#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slim/isotonic.hpp"
#include "slim/types.hpp"

namespace slim::selfcheck {

struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::vector<std::string> messages;  // one per failure
  bool ok() const { return failures == 0; }
};

// Reference implementations; slow on purpose.
double kendall_naive(const Vector& u, const Vector& v);
Vector pava_naive(const Vector& z, const isotonic::MonotoneOrder& order);

// Fast Kendall kernel vs the O(n^2) definition, plus rank invariance under
// strictly increasing maps.
SuiteResult check_kendall(std::uint64_t seed = 42, int cases = 500);

// Composed standardized isotonic projection vs the Dykstra oracle.
SuiteResult check_projection(std::uint64_t seed = 42, int cases = 500);

// solve_kds vs the enumeration LP oracle on small instances.
SuiteResult check_lp(std::uint64_t seed = 42, int cases = 200);

std::vector<SuiteResult> run_all(std::uint64_t seed = 42);

} // namespace slim::selfcheck
