#include "umbrella/walker.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <unordered_set>

namespace umbrella {

RowSampler::RowSampler(const std::vector<TransitionRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("RowSampler: empty row table");
  d_ = rows.front().d;
  for (auto& r : rows) {
    if (r.sum() != Rational(1, 1)) throw std::invalid_argument("RowSampler: row does not sum to 1");
    std::vector<Rational> c;
    Rational acc(0, 1);
    for (int k = 0; k < 2 * d_; ++k) {
      acc = acc + r.p[k];
      c.push_back(acc);
    }
    cum_.push_back(std::move(c));
  }
}

Direction RowSampler::sample(std::size_t row, std::uint64_t u) const {
  const auto& c = cum_[row];
  for (int k = 0; k + 1 < 2 * d_; ++k) {
    const auto lhs = static_cast<unsigned __int128>(u) * c[k].den;
    const auto rhs = static_cast<unsigned __int128>(c[k].num) << 64;
    if (lhs < rhs) return Direction::from_code(static_cast<std::uint8_t>(k));
  }
  return Direction::from_code(static_cast<std::uint8_t>(2 * d_ - 1));
}

Site step(const PatchedEnv& env, const RowSampler& sampler, const Site& x, SplitMix64& rng) {
  const std::size_t row = env.window.contains(x) ? env.row_id[env.window.index(x)] : 0;
  return x + sampler.sample(row, rng()).unit(env.d);
}

std::int64_t steps_to_leave(const Box& b, const Site& x) { return b.contains(x) ? b.depth(x) + 1 : 0; }

namespace {
double signed_progress(const Site& x, const Site& x0, int orientation) {
  return static_cast<double>(orientation == 1 ? (x - x0).coord_sum() : -(x - x0).coord_sum());
}
}  // namespace

TrapEstimate trap_probability(const PatchedEnv& env, const Membership& region, const Box& core,
                              const WalkConfig& cfg) {
  if (cfg.horizon < 1) throw std::invalid_argument("walk horizon must be >= 1");
  if (!region.in(cfg.start)) throw std::invalid_argument("walk start " + cfg.start.str() + " is not in the region");
  if (!core.contains(cfg.start)) throw std::invalid_argument("walk start " + cfg.start.str() + " is outside the core");
  TrapEstimate est;
  const std::int64_t N = cfg.horizon;
  est.effective_horizon = std::min(N, steps_to_leave(core, cfg.start));
  est.replicas = static_cast<std::uint64_t>(cfg.replicas);
  est.exit_hist.assign(static_cast<std::size_t>(N) + 1, 0);
  const RowSampler sampler(env.rows);
  std::vector<double> progress;
  for (std::int64_t rep = 0; rep < cfg.replicas; ++rep) {
    SplitMix64 rng(derive_seed(cfg.seed, "walk", static_cast<std::uint64_t>(rep)));
    Trace t;
    progress.assign(1, 0.0);
    Site x = cfg.start;
    for (std::int64_t n = 1; n <= N; ++n) {
      x = step(env, sampler, x, rng);
      progress.push_back(signed_progress(x, cfg.start, cfg.orientation));
      if (!core.contains(x)) {
        t.truncated = true;
        break;
      }
      if (!region.in(x)) {
        t.exit_step = n;
        break;
      }
    }
    const auto L = static_cast<std::int64_t>(progress.size()) - 1;
    t.length = L;
    const auto at = [&](std::int64_t n) { return progress[static_cast<std::size_t>(n)] / static_cast<double>(n); };
    const std::int64_t half = std::max<std::int64_t>(L / 2, 1);
    t.drift_half = at(half);
    t.drift_3q = at(std::max<std::int64_t>((3 * L) / 4, 1));
    t.drift_full = at(L);
    t.drift_min = 1e300;
    for (std::int64_t n = half; n <= L; ++n) t.drift_min = std::min(t.drift_min, at(n));
    t.survived = t.exit_step < 0;
    if (t.survived)
      ++est.survivors;
    else
      ++est.exit_hist[static_cast<std::size_t>(t.exit_step)];
    est.truncated += t.truncated;
    est.traces.push_back(t);
  }
  est.survival_ci = wilson_interval(est.survivors, est.replicas);
  return est;
}

StartSite deepest_ray_start(const std::vector<Tube>& tubes, int forest_id, const Box& core, std::int64_t u_min) {
  bool found = false;
  StartSite best;
  for (std::size_t t = 0; t < tubes.size(); ++t) {
    const auto& ray = tubes[t].ray();
    if (ray.forest != forest_id) continue;
    for (std::size_t n = 1; n < ray.core_steps; ++n) {
      const Site& x = ray.anc[n];
      const auto k = tubes[t].find(x);
      const std::int64_t u = tubes[t].u(k);
      if (u < u_min) continue;
      const std::int64_t buf = steps_to_leave(core, x);
      const bool better = !found || u > best.u || (u == best.u && (buf > best.buffer || (buf == best.buffer && x < best.x)));
      if (better) {
        best = {x, t, n, u, buf};
        found = true;
      }
    }
  }
  if (!found)
    throw NoDeepRay("no on-ray site of forest " + std::to_string(forest_id) + " has u_z >= " + std::to_string(u_min) +
                    " at depth n >= 1");
  return best;
}

DriftSummary drift_on_survival(const TrapEstimate& est) {
  std::vector<double> v;
  for (auto& t : est.traces)
    if (t.survived) v.push_back(t.drift_min);
  DriftSummary s;
  s.traces = v.size();
  if (v.empty()) return s;
  s.q05 = quantile(v, 0.05);
  s.median = quantile(v, 0.5);
  s.min = *std::min_element(v.begin(), v.end());
  return s;
}

ExitTail exit_tail(const Tube& tube, const Site& x, std::int64_t replicas, std::int64_t N, std::uint64_t seed) {
  ExitTail out;
  out.hist.assign(static_cast<std::size_t>(N) + 1, 0);
  const int d = tube.dim();
  std::unordered_set<Site, SiteHash> spine(tube.ray().anc.begin(), tube.ray().anc.begin() + tube.ray().core_steps);
  std::vector<TransitionRow> rows{uniform_row(d)};
  std::vector<std::size_t> row_of(tube.size());
  for (std::size_t k = 0; k < tube.size(); ++k) {
    const auto r = omega_row(d, tube.drift(k));
    auto it = std::find(rows.begin(), rows.end(), r);
    if (it == rows.end()) {
      rows.push_back(r);
      it = rows.end() - 1;
    }
    row_of[k] = static_cast<std::size_t>(it - rows.begin());
  }
  const RowSampler sampler(rows);
  for (std::int64_t n = 1; n <= N; n *= 2) out.slow.push_back({n, 0, 0});
  const int zeta = tube.ray().zeta;
  for (std::int64_t rep = 0; rep < replicas; ++rep) {
    SplitMix64 rng(derive_seed(seed, "exit", static_cast<std::uint64_t>(rep)));
    std::size_t next_check = 0;
    Site y = x;
    std::int64_t T = -1;
    for (std::int64_t n = 0; n <= N; ++n) {
      const auto k = tube.find(y);
      if (k == Tube::npos) {
        T = n;
        break;
      }
      if (n > 0 && spine.count(y)) ++out.spine_returns;
      if (next_check < out.slow.size() && out.slow[next_check].n == n) {
        auto& row = out.slow[next_check++];
        ++row.alive;
        if (static_cast<double>(zeta * (y - x).coord_sum()) < 0.4 * static_cast<double>(n)) ++row.slow;
      }
      if (n == N) break;
      y = y + sampler.sample(row_of[k], rng()).unit(d);
    }
    if (T < 0)
      ++out.survivors;
    else
      ++out.hist[static_cast<std::size_t>(T)];
    if (T >= 0 && (out.min_T < 0 || T < out.min_T)) out.min_T = T;
  }
  // log P[T > n] against n^beta over the observed range
  std::vector<double> xs, ys;
  std::uint64_t above = static_cast<std::uint64_t>(replicas);
  for (std::int64_t n = 0; n <= N; ++n) {
    above -= out.hist[static_cast<std::size_t>(n)];
    if (above == 0) break;
    if (n >= 1) {
      xs.push_back(std::pow(static_cast<double>(n), tube.ray().beta));
      ys.push_back(std::log(static_cast<double>(above) / static_cast<double>(replicas)));
    }
  }
  if (xs.size() >= 2 && xs.front() != xs.back()) out.logsurv_slope = least_squares(xs, ys).slope;
  return out;
}

void write_walks_csv(std::ostream& os, const TrapEstimate& est) {
  os << "replica,survived,exit_step,drift_half,drift_3q,drift_full,truncated_flag\n";
  os.precision(10);
  for (std::size_t r = 0; r < est.traces.size(); ++r) {
    const auto& t = est.traces[r];
    os << r << ',' << (t.survived ? 1 : 0) << ',' << t.exit_step << ',' << t.drift_half << ',' << t.drift_3q << ','
       << t.drift_full << ',' << (t.truncated ? 1 : 0) << '\n';
  }
}

PatchedEnv uniform_env(const Box& window) {
  PatchedEnv env;
  env.window = window;
  env.d = window.dim();
  env.rows.push_back(uniform_row(env.d));
  const std::size_t n = window.volume();
  env.row_id.assign(n, 0);
  env.chosen.assign(n, -1);
  env.flagged.assign(n, 0);
  env.E.assign(n, 0.0);
  env.p.assign(n, 1.0);
  return env;
}

}  // namespace umbrella
