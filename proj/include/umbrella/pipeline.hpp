#pragma once

#include <cstdint>
#include <vector>

#include "umbrella/environment.hpp"
#include "umbrella/pruning.hpp"
#include "umbrella/ray_geometry.hpp"
#include "umbrella/statistics.hpp"

namespace umbrella {

struct PipelineOptions {
  std::int64_t R = 0;  // lambda search radius; 0 picks twice the largest window extent
  double c31 = 0;      // 0 calibrates
  Selection selection = Selection::argmin;
  bool build_env = true;
};

// Forests, metrics, pruning, insulation and the patched environment for one seed.
struct Pipeline {
  ModelParams p;
  Box window;
  std::int64_t R = 0;
  Forest f1, f2;
  HField h1, h2;
  HInsField H1, H2;
  Membership tt1, tt2;
  Box core;
  Membership T1, T2;
  Insulation I1, I2;
  std::vector<Tube> tubes;
  C20 c20;
  double c21 = 0;
  C31Result c31;
  PatchedEnv env;

  const HInsField& H(int forest_id) const { return forest_id == 1 ? H1 : H2; }
  const Insulation& I(int forest_id) const { return forest_id == 1 ? I1 : I2; }
};

// Members with certain H, every stride-th tube.
std::vector<CalibrationPair> calibration_pairs(const std::vector<Tube>& tubes, const HInsField& H1,
                                               const HInsField& H2, std::size_t stride = 1);

std::int64_t default_radius(const Box& window);

Pipeline run_pipeline(const ModelParams& p, std::uint64_t seed, const Box& window, const PipelineOptions& opt = {});

// 1{omega(x, x + dir) >= threshold} on the argmin-patched environment of an independent
// pipeline per replica, seeds derive_seed(seed, "mixing-omega", r). grid must lie in window.
ReplicaGrid omega_indicator(const ModelParams& p, std::uint64_t seed, const Box& window, const Box& grid,
                            Direction dir, Rational threshold, const PipelineOptions& opt = {});

}  // namespace umbrella
