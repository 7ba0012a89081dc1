#include "slim/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "slim/dantzig.hpp"
#include "slim/rank_corr.hpp"
#include "slim/rng.hpp"

namespace slim::selfcheck {

namespace {

int sgn(double a, double b) { return (a < b) - (b < a); }

void record(SuiteResult& r, bool pass, const std::string& msg) {
  ++r.cases;
  if (!pass) {
    ++r.failures;
    if (r.messages.size() < 20) r.messages.push_back(msg);
  }
}

std::string describe(const char* what, int case_id, double got,
                     double want) {
  std::ostringstream os;
  os.precision(17);
  os << what << " case " << case_id << ": got " << got << ", want " << want;
  return os.str();
}

Vector random_vector(std::mt19937_64& gen, int n, double tie_rate) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(gen);
  if (tie_rate > 0) {
    for (int i = 1; i < n; ++i)
      if (unif(gen) < tie_rate) v(i) = v(static_cast<int>(gen() % i));
  }
  return v;
}

} // namespace

double kendall_naive(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("kendall_naive: length mismatch");
  long n = u.size();
  if (n < 2) throw std::invalid_argument("kendall_naive: need n >= 2");
  long long s = 0;
  for (long k = 0; k < n; ++k)
    for (long l = k + 1; l < n; ++l)
      s += sgn(u(k), u(l)) * sgn(v(k), v(l));
  long long n0 = n * (n - 1) / 2;
  return static_cast<double>(s) / static_cast<double>(n0);
}

Vector pava_naive(const Vector& z, const isotonic::MonotoneOrder& order) {
  long n = z.size();
  if (static_cast<long>(order.perm.size()) != n)
    throw std::invalid_argument("pava_naive: order does not match z");

  // start from the pooled tie groups, then keep merging any adjacent pair
  // whose means violate monotonicity until none does
  struct Block {
    int lo, hi; // group index range [lo, hi]
    double sum;
    long count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (std::size_t g = 0; g < order.groups.size(); ++g) {
    auto [b, e] = order.groups[g];
    Block blk{static_cast<int>(g), static_cast<int>(g), 0.0,
              static_cast<long>(e - b)};
    for (int k = b; k < e; ++k) blk.sum += z(order.perm[k]);
    blocks.push_back(blk);
  }
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
      if (blocks[i].mean() > blocks[i + 1].mean()) {
        blocks[i].hi = blocks[i + 1].hi;
        blocks[i].sum += blocks[i + 1].sum;
        blocks[i].count += blocks[i + 1].count;
        blocks.erase(blocks.begin() + i + 1);
        merged = true;
        break;
      }
    }
  }
  Vector out(n);
  for (const Block& blk : blocks) {
    // fresh in-order accumulation, so the value never depends on which
    // merges happened in which order
    double sum = 0.0;
    long count = 0;
    for (int g = blk.lo; g <= blk.hi; ++g) {
      auto [b, e] = order.groups[g];
      for (int k = b; k < e; ++k) sum += z(order.perm[k]);
      count += e - b;
    }
    double value = sum / static_cast<double>(count);
    for (int g = blk.lo; g <= blk.hi; ++g) {
      auto [b, e] = order.groups[g];
      for (int k = b; k < e; ++k) out(order.perm[k]) = value;
    }
  }
  return out;
}

SuiteResult check_kendall(std::uint64_t seed, int cases) {
  SuiteResult result;
  result.name = "kendall";
  std::mt19937_64 gen = rng::engine(seed, 0x5c01);
  std::uniform_int_distribution<int> size_dist(2, 60);
  for (int c = 0; c < cases; ++c) {
    int n = size_dist(gen);
    double tie_rate = (c % 3 == 0) ? 0.4 : 0.0;
    Vector u = random_vector(gen, n, tie_rate);
    Vector v = random_vector(gen, n, tie_rate);

    double fast = rank_corr::kendall_tau_pair(u, v);
    double naive = kendall_naive(u, v);
    record(result, std::abs(fast - naive) <= 1e-12,
           describe("fast vs naive", c, fast, naive));

    // rank invariance: strictly increasing maps leave tau untouched
    Vector u_cube = u.array().cube().matrix();
    Vector v_scaled = (2.0 * v.array() + 7.0).matrix();
    double tau_mapped = rank_corr::kendall_tau_pair(u_cube, v_scaled);
    record(result, tau_mapped == fast,
           describe("rank invariance", c, tau_mapped, fast));

    if (u.cwiseAbs().maxCoeff() < 700.0) {
      // unaryExpr keeps exp scalar; the vectorized path can round the same
      // input differently in the packet body and the tail, splitting ties
      Vector u_exp = u.unaryExpr([](double a) { return std::exp(a); });
      double tau_exp = rank_corr::kendall_tau_pair(u_exp, v);
      record(result, tau_exp == fast,
             describe("rank invariance exp", c, tau_exp, fast));
    }
  }
  return result;
}

SuiteResult check_projection(std::uint64_t seed, int cases) {
  SuiteResult result;
  result.name = "projection";
  std::mt19937_64 gen = rng::engine(seed, 0x7e3);
  std::uniform_int_distribution<int> size_dist(2, 40);
  const double scales[3] = {0.1, 1.0, 10.0};
  for (int c = 0; c < cases; ++c) {
    int n = size_dist(gen);
    Vector x = random_vector(gen, n, c % 2 ? 0.2 : 0.0);
    Vector z = scales[c % 3] * random_vector(gen, n, 0.0);
    auto order = isotonic::monotone_order(x);
    Vector composed = isotonic::standardized_isotonic(z, order).value;
    auto oracle = isotonic::dykstra_oracle(z, order);
    double diff = (composed - oracle.value).cwiseAbs().maxCoeff();
    record(result, oracle.converged && diff <= 1e-6,
           describe("composition vs dykstra", c, diff, 0.0));
  }
  return result;
}

SuiteResult check_lp(std::uint64_t seed, int cases) {
  SuiteResult result;
  result.name = "lp";
  std::mt19937_64 gen = rng::engine(seed, 0x1b);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int c = 0; c < cases; ++c) {
    int p = 1 + c % 4;
    Matrix A(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) A(i, j) = normal(gen);
    Matrix Q;
    if (c % 4 == 3) {
      Q = ((A + A.transpose()) / 2.0).eval(); // usually indefinite
    } else {
      Q = A * A.transpose() + 0.1 * Matrix::Identity(p, p);
    }
    Vector r(p);
    for (int i = 0; i < p; ++i) r(i) = normal(gen);
    double rinf = r.cwiseAbs().maxCoeff();
    double gamma;
    switch (c % 5) {
      case 0: gamma = 0.0; break;
      case 1: gamma = 1.5 * rinf; break; // zero shortcut territory
      default: gamma = unif(gen) * rinf; break;
    }

    dantzig::KdsProblem prob{Q, r, gamma};
    dantzig::SolverConfig scfg;
    scfg.max_iterations = 20000;
    scfg.abs_tol = 1e-9;
    dantzig::KdsSolution sol = dantzig::solve_kds(prob, scfg);
    bool oracle_feasible = true;
    double oracle_obj = 0.0;
    try {
      oracle_obj = dantzig::lp_oracle(prob).objective;
    } catch (const std::runtime_error&) {
      oracle_feasible = false;
    }

    if (!oracle_feasible) {
      record(result, sol.status != dantzig::SolveStatus::converged,
             describe("infeasible detected", c,
                      static_cast<double>(sol.status), 2.0));
      continue;
    }
    double slack = sol.residual_inf - gamma;
    record(result, slack <= 1e-6,
           describe("constraint slack", c, slack, 0.0));
    double obj = sol.theta_check.lpNorm<1>();
    record(result,
           obj <= oracle_obj + 1e-5 * std::max(1.0, oracle_obj),
           describe("objective vs oracle", c, obj, oracle_obj));
  }
  return result;
}

std::vector<SuiteResult> run_all(std::uint64_t seed) {
  std::vector<SuiteResult> out;
  out.push_back(check_kendall(seed));
  out.push_back(check_projection(seed));
  out.push_back(check_lp(seed));
  return out;
}

} // namespace slim::selfcheck
