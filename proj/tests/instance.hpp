#pragma once

#include <algorithm>

#include "umbrella/pruning.hpp"
#include "umbrella/ray_geometry.hpp"
#include "umbrella/rng.hpp"

namespace testing_support {

using namespace umbrella;

inline CensoredField constant_field(const Box& w, std::int32_t v) {
  CensoredField f(w);
  std::fill(f.values().begin(), f.values().end(), v);
  return f;
}

// every parent is +e_0
inline Forest straight_forest(const Box& w) { return Forest(w, +1, std::vector<std::uint8_t>(w.volume(), 0)); }

struct Instance {
  ModelParams p;
  Forest f1, f2;
  HField h1, h2;
  HInsField H1, H2;
  Box core;
  Membership tt1, tt2, T1, T2;
  Insulation I1, I2;

  std::vector<Tube> tubes() const {
    std::vector<Tube> out;
    for (auto* I : {&I1, &I2})
      for (auto& r : I->rays) out.emplace_back(r, p.d);
    return out;
  }
  const HInsField& H(int forest_id) const { return forest_id == 1 ? H1 : H2; }
};

inline Instance build(int d, std::int64_t side, std::uint64_t seed, bool corrupt_H = false) {
  Instance in;
  in.p = ModelParams::preset(d);
  const Box w = Box::cube(d, 0, side - 1);
  const std::int64_t R = 2 * side;
  in.f1 = build_forest(in.p, derive_seed(seed, "field", 1), w, +1, R);
  in.f2 = build_forest(in.p, derive_seed(seed, "field", 2), w, -1, R);
  in.h1 = compute_h(in.f1);
  in.h2 = compute_h(in.f2);
  in.H1 = corrupt_H ? constant_field(w, 0) : compute_H(in.h1, in.p.beta);
  in.H2 = corrupt_H ? constant_field(w, 0) : compute_H(in.h2, in.p.beta);
  in.tt1 = tilde_T(in.h1, in.H2, in.p.beta);
  in.tt2 = tilde_T(in.h2, in.H1, in.p.beta);
  in.core = default_core(in.h1, in.h2, in.p.beta);
  in.T1 = prune_to_infinite(in.f1, in.tt1, in.core);
  in.T2 = prune_to_infinite(in.f2, in.tt2, in.core);
  in.I1 = insulate(in.T1, in.h1, in.f1, 1, in.core, in.p.beta);
  in.I2 = insulate(in.T2, in.h2, in.f2, 2, in.core, in.p.beta);
  return in;
}

// straight ray along +e_0 from z = 0, in-core ancestors 0..K-1 plus the exit step
inline RayHandle straight_ray(int d, std::size_t K, double beta, int zeta = 1) {
  RayHandle r;
  r.z = Site(d);
  r.forest = zeta == 1 ? 1 : 2;
  r.zeta = zeta;
  r.beta = beta;
  for (std::size_t n = 0; n <= K; ++n) {
    Site a = r.z;
    a[0] = zeta * static_cast<std::int64_t>(n);
    r.anc.push_back(a);
  }
  r.core_steps = K;
  return r;
}

}  // namespace testing_support
