#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "umbrella/environment.hpp"
#include "umbrella/estimators.hpp"
#include "umbrella/rng.hpp"

namespace umbrella {

// Exact sampler for a table of rational rows: a 64-bit uniform U selects the first
// direction c with U < (p_0 + ... + p_c) * 2^64, compared in 128-bit arithmetic.
class RowSampler {
 public:
  explicit RowSampler(const std::vector<TransitionRow>& rows);
  Direction sample(std::size_t row, std::uint64_t u) const;
  int dim() const { return d_; }

 private:
  int d_ = 0;
  std::vector<std::vector<Rational>> cum_;
};

// One step from x; sites outside the environment window use the uniform row.
Site step(const PatchedEnv& env, const RowSampler& sampler, const Site& x, SplitMix64& rng);

struct WalkConfig {
  Site start;
  std::int64_t horizon = 10000;
  std::int64_t replicas = 500;
  std::uint64_t seed = 1;
  int orientation = 1;  // forest id: drift is measured along +1 for 1, -1 for 2
};

// A walk stepping out of the core while still in the region is stopped and flagged
// truncated; it counts as surviving up to its length.
struct Trace {
  bool survived = false;
  std::int64_t exit_step = -1;
  std::int64_t length = 0;  // steps taken: N, the exit step or the truncation step
  double drift_half = 0, drift_3q = 0, drift_full = 0;  // signed displacement / n at L/2, 3L/4, L
  double drift_min = 0;  // min over n in [L/2, L]
  bool truncated = false;
};

struct TrapEstimate {
  std::int64_t effective_horizon = 0;  // min(N, steps_to_leave(core, start)): no trace is truncated before it
  std::uint64_t survivors = 0, replicas = 0, truncated = 0;
  Interval survival_ci;
  std::vector<Trace> traces;
  std::vector<std::uint64_t> exit_hist;  // exit_hist[n] = traces leaving at step n
  double survival() const { return replicas ? static_cast<double>(survivors) / replicas : 0.0; }
};

// l1 distance from x to the complement of the box: steps needed to leave it.
std::int64_t steps_to_leave(const Box& b, const Site& x);

// Fraction of walks that stay in `region` (certain IN) for N steps or until truncated at the core boundary.
TrapEstimate trap_probability(const PatchedEnv& env, const Membership& region, const Box& core, const WalkConfig& cfg);

struct StartSite {
  Site x;
  std::size_t tube = 0;
  std::size_t n = 0;
  std::int64_t u = 0;
  std::int64_t buffer = 0;
};

struct NoDeepRay : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// On-ray site alpha^n(z), n >= 1, of a tube from the given forest with the largest u_z, then the largest buffer.
StartSite deepest_ray_start(const std::vector<Tube>& tubes, int forest_id, const Box& core, std::int64_t u_min);

struct DriftSummary {
  std::size_t traces = 0;
  double q05 = 0, median = 0, min = 0;
};

DriftSummary drift_on_survival(const TrapEstimate& est);

// Walks still inside at step n, and those among them whose progress along zeta*1 is below 0.4n.
struct SlowRow {
  std::int64_t n = 0;
  std::uint64_t alive = 0, slow = 0;
};

struct ExitTail {
  std::vector<std::uint64_t> hist;  // hist[n] = walks with T_z = n
  std::uint64_t survivors = 0;      // T_z > N
  std::uint64_t spine_returns = 0;  // visits to Ray(z) after time 0
  double logsurv_slope = 0;         // slope of log P[T > n] against n^beta
  std::int64_t min_T = -1;
  std::vector<SlowRow> slow;  // n = 1, 2, 4, ... <= N
};

ExitTail exit_tail(const Tube& tube, const Site& x, std::int64_t replicas, std::int64_t N, std::uint64_t seed);

void write_walks_csv(std::ostream& os, const TrapEstimate& est);

PatchedEnv uniform_env(const Box& window);

}  // namespace umbrella
