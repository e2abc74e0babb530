#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "umbrella/estimators.hpp"
#include "umbrella/field.hpp"
#include "umbrella/lattice.hpp"
#include "umbrella/metrics.hpp"

namespace umbrella {

// ---- mixing ----

// Fills values (one per site of the grid box, |f| <= 1) for one independent replica.
using ReplicaGrid = std::function<void(std::uint64_t replica, std::vector<double>& values)>;

struct MixingRow {
  Site s;
  std::int64_t s_l1 = 0;
  double cov = 0;
  double stderr_ = 0;  // delete-one jackknife over replicas
  Interval ci;
  double s_pow_gamma_cov = 0;
};

struct MixingTable {
  std::string target;
  std::string functional;
  double gamma = 1;
  std::uint64_t replicas = 0;
  std::uint64_t pairs_per_replica = 0;
  std::vector<MixingRow> rows;
};

struct InsufficientReplicas : std::runtime_error {
  std::uint64_t required;
  InsufficientReplicas(const std::string& what, std::uint64_t req) : std::runtime_error(what), required(req) {}
};

struct MixingSpec {
  Box grid;  // sites the functional is evaluated on
  Box base;  // x ranges over base; x + s must stay in grid
  std::vector<Site> shifts;
  std::uint64_t replicas = 5000;
  double gamma = 1;
  double max_halfwidth = 0;  // 0: no requirement
};

// Pooled cov(f(x), f(x+s)) over x in base and replicas.
MixingTable mixing_covariance(const MixingSpec& spec, const ReplicaGrid& grid, std::string target,
                              std::string functional);

// 1{a(x) = x + zeta e_axis} on an umbrella forest drawn per replica from derive_seed(seed, "mixing", r).
ReplicaGrid forest_axis_indicator(const ModelParams& p, std::uint64_t seed, const Box& grid, std::int64_t R,
                                  int axis, int zeta = +1);
// 1{a_1(x) and a_2(x) use the same axis}, forests drawn from independent fields.
ReplicaGrid pair_same_axis(const ModelParams& p, std::uint64_t seed, const Box& grid, std::int64_t R);

void write_mixing_csv(std::ostream& os, const std::vector<MixingTable>& tables);

// ---- tail exponents ----

struct ExponentFit {
  LineFit lower, upper;  // lower / upper censoring bracket
};

struct DegenerateGrid : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Least squares of log p against log n per bracket; needs >= 4 grid points with nonzero counts.
ExponentFit exponent_fit(const TailEstimate& tail);

// ---- report ----

struct InvariantRow {
  std::string name;
  std::string status;  // pass | fail | skipped
  std::string detail;
};

struct TailTable {
  std::string label;
  TailEstimate estimate;
  std::optional<ExponentFit> fit;
};

struct TrapRow {
  std::string label;
  int forest = 1;
  std::int64_t horizon = 0, effective_horizon = 0;
  std::uint64_t replicas = 0, survivors = 0, truncated = 0;
  double ci_lo = 0, ci_hi = 0;
  double drift_q05 = 0, drift_median = 0;
};

struct Report {
  static constexpr int kSchemaVersion = 1;
  std::map<std::string, std::string> params;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, double> constants;
  std::vector<TailTable> tails;
  std::vector<InvariantRow> invariants;
  std::vector<TrapRow> traps;
  std::vector<MixingTable> mixing;
  std::map<std::string, double> censoring;
};

struct ReportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Canonical JSON: sorted keys, two-space indent, trailing newline.
std::string serialize_report(const Report& r);
// Rejects unknown fields and other schema versions.
Report parse_report(const std::string& text);

}  // namespace umbrella
