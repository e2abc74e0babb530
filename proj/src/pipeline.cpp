#include "umbrella/pipeline.hpp"

#include <algorithm>

#include "umbrella/rng.hpp"

namespace umbrella {

std::vector<CalibrationPair> calibration_pairs(const std::vector<Tube>& tubes, const HInsField& H1,
                                               const HInsField& H2, std::size_t stride) {
  std::vector<CalibrationPair> pairs;
  for (std::size_t t = 0; t < tubes.size(); t += std::max<std::size_t>(stride, 1)) {
    const auto& H = tubes[t].ray().forest == 1 ? H1 : H2;
    for (std::size_t k = 0; k < tubes[t].size(); ++k) {
      const auto idx = H.window().index(tubes[t].site(k));
      if (H.exact(idx)) pairs.push_back({t, k, H.value(idx)});
    }
  }
  return pairs;
}

std::int64_t default_radius(const Box& window) {
  std::int64_t e = 1;
  for (int j = 0; j < window.dim(); ++j) e = std::max(e, window.extent(j));
  return 2 * e;
}

Pipeline run_pipeline(const ModelParams& p, std::uint64_t seed, const Box& window, const PipelineOptions& opt) {
  require_valid(p);
  Pipeline pl;
  pl.p = p;
  pl.window = window;
  pl.R = opt.R > 0 ? opt.R : default_radius(window);
  pl.f1 = build_forest(p, derive_seed(seed, "field", 1), window, +1, pl.R);
  pl.f2 = build_forest(p, derive_seed(seed, "field", 2), window, -1, pl.R);
  pl.h1 = compute_h(pl.f1);
  pl.h2 = compute_h(pl.f2);
  pl.H1 = compute_H(pl.h1, p.beta);
  pl.H2 = compute_H(pl.h2, p.beta);
  pl.tt1 = tilde_T(pl.h1, pl.H2, p.beta);
  pl.tt2 = tilde_T(pl.h2, pl.H1, p.beta);
  pl.core = default_core(pl.h1, pl.h2, p.beta);
  pl.T1 = prune_to_infinite(pl.f1, pl.tt1, pl.core);
  pl.T2 = prune_to_infinite(pl.f2, pl.tt2, pl.core);
  pl.I1 = insulate(pl.T1, pl.h1, pl.f1, 1, pl.core, p.beta);
  pl.I2 = insulate(pl.T2, pl.h2, pl.f2, 2, pl.core, p.beta);
  for (const auto* I : {&pl.I1, &pl.I2})
    for (const auto& r : I->rays) pl.tubes.emplace_back(r, p.d);
  pl.c20 = solve_c20(p.d, p.beta);
  pl.c21 = c21_from(pl.c20, p.beta);
  if (!opt.build_env) return pl;

  if (opt.c31 > 0) {
    pl.c31.c31 = opt.c31;
  } else {
    pl.c31 = choose_c31(pl.tubes, calibration_pairs(pl.tubes, pl.H1, pl.H2), std::max(pl.c21, 1.0),
                        kappa(p.d).value());
  }
  const PatchInput in{&pl.tubes, &pl.H1, &pl.H2, pl.c31.c31};
  pl.env = patch(window, in, opt.selection);
  return pl;
}

}  // namespace umbrella

namespace umbrella {

ReplicaGrid omega_indicator(const ModelParams& p, std::uint64_t seed, const Box& window, const Box& grid,
                            Direction dir, Rational threshold, const PipelineOptions& opt) {
  if (!window.contains(grid.lo()) || !window.contains(grid.hi()))
    throw std::invalid_argument("omega_indicator: grid leaves the window");
  return [=](std::uint64_t r, std::vector<double>& v) {
    const auto pl = run_pipeline(p, derive_seed(seed, "mixing-omega", r), window, opt);
    for_each_site(grid, [&](std::size_t idx, const Site& x) { v[idx] = pl.env.row(x).p[dir.code()] >= threshold ? 1.0 : 0.0; });
  };
}

}  // namespace umbrella
