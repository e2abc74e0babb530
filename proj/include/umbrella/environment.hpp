#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "umbrella/metrics.hpp"
#include "umbrella/pruning.hpp"
#include "umbrella/rational.hpp"
#include "umbrella/ray_geometry.hpp"

namespace umbrella {

// 2d exact probabilities indexed by Direction::code().
struct TransitionRow {
  int d = 0;
  std::array<Rational, 2 * kMaxDim> p{};

  Rational sum() const;
  Rational min() const;
  std::array<double, 2 * kMaxDim> as_double() const;
  friend bool operator==(const TransitionRow&, const TransitionRow&) = default;
};

Rational kappa(int d);
TransitionRow uniform_row(int d);
// 3/4 on r, 1/5 on s, the rest spread evenly; r = s puts 19/20 on r.
TransitionRow omega_row(int d, const Drift& rs);
TransitionRow omega_z_row(const Tube& tube, const Site& x);

struct ExitPoint {
  std::int64_t horizon = 0;
  double p = 0;         // P[T <= horizon]
  double E = 0;         // E[T; T <= horizon]
  double censored = 0;  // part of p leaving through the truncated end
};

struct TubeDPOptions {
  double survival_floor = 1e-20;
  std::int64_t max_steps = 2'000'000;
};

struct TubeDPResult {
  // per member, one entry per requested horizon (same order), then the final state
  std::vector<std::vector<ExitPoint>> at;
  std::vector<ExitPoint> final_state;
  std::int64_t steps = 0;    // DP steps actually run
  bool converged = false;    // surviving mass fell below the floor
};

// Steps out of the finite tube are exits. Those to a y that may still belong to the
// untruncated InsRay(z) are also counted as censored.
bool certainly_outside(const RayHandle& ray, const Site& y);

// Backward induction over all tube members at once. Horizons per member may differ.
TubeDPResult tube_dp(const Tube& tube, const std::vector<std::vector<std::int64_t>>& horizons,
                     const TubeDPOptions& opt = {});

struct ExitStats {
  double p = 0;
  double E = 0;
  std::vector<ExitPoint> extra;  // E[T; T <= N] at each extra horizon
  ExitPoint limit;                // state once the DP converged
};

ExitStats exit_functionals(const Tube& tube, const Site& x, std::int64_t M, const std::vector<std::int64_t>& Ns = {});

struct CalibrationPair {
  std::size_t tube = 0;
  std::size_t member = 0;
  std::int64_t H = 0;
};

struct C31Result {
  double c31 = 0;
  int doublings = 0;
  double worst_excess = 0;  // max over pairs of tail mass - kappa^u at the chosen c31
  CalibrationPair worst;
};

struct C31Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Smallest c = floor * 2^k (k <= max_doublings) with E[T; cH < T <= N_max] <= kappa^u on every pair.
C31Result choose_c31(const std::vector<Tube>& tubes, const std::vector<CalibrationPair>& pairs, double floor,
                     double kappa_value, int max_doublings = 40);

enum class Selection { argmin, argmax };

struct PatchedEnv {
  Box window;
  int d = 0;
  std::vector<TransitionRow> rows;     // row table; entry 0 is uniform
  std::vector<std::uint16_t> row_id;   // per window site
  std::vector<std::int32_t> chosen;    // tube index, -1 outside C_1 u C_2
  std::vector<std::uint8_t> flagged;   // censored H: row of the first covering tube
  std::vector<double> E;               // E_{z(x)}(x), 0 outside
  std::vector<double> p;               // p_{z(x)}(x), 1 outside

  const TransitionRow& row(std::size_t idx) const { return rows[row_id[idx]]; }
  const TransitionRow& row(const Site& x) const { return row(window.index(x)); }

  void write(std::ostream& os) const;
  static PatchedEnv read(std::istream& is);
};

struct PatchInput {
  const std::vector<Tube>* tubes = nullptr;
  // H of the forest each tube belongs to, indexed by forest id 1 or 2
  const HInsField* H1 = nullptr;
  const HInsField* H2 = nullptr;
  double c31 = 1;
};

PatchedEnv patch(const Box& window, const PatchInput& in, Selection sel = Selection::argmin);

struct Residuals {
  double worst = -1e300;
  Site witness;
  std::uint64_t eligible = 0;
  std::uint64_t violations = 0;  // residual > tol
};

Residuals supermartingale_residuals(const PatchedEnv& env, double kappa_value, double tol = 1e-9);

}  // namespace umbrella
