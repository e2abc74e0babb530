#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "umbrella/field.hpp"
#include "umbrella/forest.hpp"
#include "umbrella/environment.hpp"
#include "umbrella/metrics.hpp"

// Slow reference implementations written directly from the definitions.
namespace umbrella::oracle {

// sup of L(y) over every vertex y in the field box whose (reflected) i-side contains x,
// optionally restricted to |x-y|_inf <= R
double brute_lambda(const Site& x, int i, const LField& field, int zeta, std::int64_t R = INT64_MAX);

struct BruteH {
  std::int64_t value = 0;
  bool censored = false;
};
BruteH brute_h(const Forest& forest, const Site& x);

// H(x) by scanning every y; censoring follows the same face and hmax rules as compute_H
BruteH brute_H(const HField& h, double beta, const Site& x);

// min |x - y|_1 over lattice sites y outside the tube
std::int64_t brute_u(const Tube& tube, const Site& x);

// v_z and n_z scanning every stored ancestor, no cutoff
VN brute_vn(const RayHandle& ray, const Site& x);

// P[T <= N], E[T; T <= N] and the censored part of P, summed over every path of length <= N
ExitPoint brute_exit(const Tube& tube, const Site& x, int N);

struct Mismatch {
  std::string what;
  std::string where;
};

struct SuiteResult {
  std::uint64_t lambda = 0, axis = 0, h = 0, H = 0, u = 0, dp = 0;  // comparisons made
  std::vector<Mismatch> mismatches;
  bool ok() const { return mismatches.empty(); }
};

// Every fast routine against its brute-force twin on cubes of side 2..max_side in d = 2, 3:
// truncated lambda and axis choice, h, H, u on forest rays, and the horizon-4 exit DP.
SuiteResult run_suite(std::int64_t max_side, std::uint64_t seed, std::size_t max_mismatches = 32);

}  // namespace umbrella::oracle
