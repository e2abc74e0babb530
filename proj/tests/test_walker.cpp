#include <doctest.h>

#include <cmath>
#include <sstream>

#include "instance.hpp"
#include "umbrella/walker.hpp"

using namespace umbrella;
using namespace testing_support;

namespace {
TransitionRow deterministic_row(int d, Direction dir) {
  TransitionRow r;
  r.d = d;
  for (int c = 0; c < 2 * d; ++c) r.p[c] = Rational(0, 1);
  r.p[dir.code()] = Rational(1, 1);
  return r;
}

PatchedEnv single_row_env(const Box& w, const TransitionRow& row) {
  auto env = uniform_env(w);
  env.rows.push_back(row);
  std::fill(env.row_id.begin(), env.row_id.end(), 1);
  return env;
}

void check_frequencies(const TransitionRow& row, std::uint64_t seed) {
  const RowSampler s({row});
  SplitMix64 rng(seed);
  const std::uint64_t n = 1'000'000;
  std::vector<std::uint64_t> hits(2 * row.d, 0);
  for (std::uint64_t k = 0; k < n; ++k) ++hits[s.sample(0, rng()).code()];
  for (int c = 0; c < 2 * row.d; ++c) {
    const double p = row.p[c].value();
    const double sigma = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(hits[c]) / n - p) <= 5 * sigma);
  }
}
}  // namespace

TEST_CASE("row sampler frequencies") {
  check_frequencies(uniform_row(3), 11);
  check_frequencies(uniform_row(2), 12);
  check_frequencies(omega_row(3, {Direction{2, -1}, Direction{2, -1}}), 13);
  check_frequencies(omega_row(3, {Direction{0, 1}, Direction{1, 1}}), 14);

  const RowSampler det({deterministic_row(2, Direction{0, 1})});
  SplitMix64 rng(3);
  for (int k = 0; k < 10000; ++k) CHECK(det.sample(0, rng()) == Direction{0, 1});
  // extreme uniforms land on the first and last direction with positive mass
  const RowSampler uni({uniform_row(2)});
  CHECK(uni.sample(0, 0) == Direction::from_code(0));
  CHECK(uni.sample(0, UINT64_MAX) == Direction::from_code(3));

  auto bad = uniform_row(2);
  bad.p[0] = Rational(1, 2);
  CHECK_THROWS(RowSampler({bad}));
}

TEST_CASE("steps are nearest neighbour and deterministic per seed") {
  const Box w = Box::cube(3, -20, 20);
  auto env = uniform_env(w);
  const RowSampler s(env.rows);
  SplitMix64 a(5), b(5);
  Site x(3), y(3);
  for (int k = 0; k < 1000; ++k) {
    const Site nx = step(env, s, x, a);
    CHECK(l1_dist(nx, x) == 1);
    x = nx;
    y = step(env, s, y, b);
    CHECK(x == y);
  }
}

TEST_CASE("uniform environment leaves a tube") {
  const Box w = Box::cube(3, -60, 60);
  auto env = uniform_env(w);
  Tube t(straight_ray(3, 50, 0.2), 3);
  Membership region(w);
  for (auto& x : t.sites()) region.set(w.index(x), Tri::in);
  const Site start{25, 0, 0};
  double prev = 1.0;
  for (std::int64_t N : {4, 8, 16, 32}) {
    WalkConfig cfg{start, N, 400, 21, 1};
    auto est = trap_probability(env, region, w, cfg);
    CHECK(est.effective_horizon == N);
    CHECK(est.survival() <= prev);
    prev = est.survival();
    std::uint64_t exited = 0;
    for (auto v : est.exit_hist) exited += v;
    CHECK(exited + est.survivors == est.replicas);
    CHECK(est.survival_ci.contains(est.survival()));
  }
  CHECK(prev < 0.02);
}

TEST_CASE("forced walk has drift one in both orientations") {
  const Box w = Box::cube(2, -40, 40);
  const Box core = w.shrunk(5);
  Membership region(w, Tri::in);
  for (int i : {1, 2}) {
    auto env = single_row_env(w, deterministic_row(2, Direction{1, i == 1 ? 1 : -1}));
    WalkConfig cfg{Site{0, 0}, 10000, 50, 3, i};
    auto est = trap_probability(env, region, core, cfg);
    CHECK(est.effective_horizon == 36);
    CHECK(est.survivors == 50);
    auto ds = drift_on_survival(est);
    CHECK(ds.traces == 50);
    CHECK(ds.q05 == 1.0);
    CHECK(ds.min == 1.0);
    for (auto& t : est.traces) {
      CHECK(t.truncated);
      CHECK(t.drift_full == 1.0);
    }
  }
  // the wrong orientation sees drift -1
  auto env = single_row_env(w, deterministic_row(2, Direction{0, 1}));
  auto est = trap_probability(env, region, w, WalkConfig{Site{0, 0}, 20, 5, 3, 2});
  CHECK(drift_on_survival(est).median == -1.0);
  CHECK(!est.traces[0].truncated);

  CHECK_THROWS(trap_probability(env, Membership(w), w, WalkConfig{Site{0, 0}, 20, 5, 3, 1}));
}

TEST_CASE("walks csv") {
  const Box w = Box::cube(2, -10, 10);
  Membership region(w, Tri::in);
  auto est = trap_probability(uniform_env(w), region, w, WalkConfig{Site{0, 0}, 8, 7, 1, 1});
  std::ostringstream os;
  write_walks_csv(os, est);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "replica,survived,exit_step,drift_half,drift_3q,drift_full,truncated_flag");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(rows == 7);
}

TEST_CASE("exit tail") {
  auto ray = straight_ray(3, 120, 0.5);
  Tube t(ray, 3);
  auto outside = exit_tail(t, Site{-3, 0, 0}, 100, 50, 1);
  CHECK(outside.hist[0] == 100);
  CHECK(outside.min_T == 0);

  // same ray depth, larger u: stochastically longer exit times on matched seeds.
  // N keeps walks away from the truncated far end.
  const Site deep = ray.anc[30];
  Site shallow = deep;
  shallow[1] += ray.int_radius(30);
  REQUIRE(t.u(t.find(deep)) > t.u(t.find(shallow)));
  const std::int64_t reps = 2000, N = 60;
  auto a = exit_tail(t, deep, reps, N, 4);
  auto b = exit_tail(t, shallow, reps, N, 4);
  // a nearest-neighbour walk needs u steps to leave
  CHECK((a.min_T < 0 || a.min_T >= t.u(t.find(deep))));
  CHECK(b.min_T >= t.u(t.find(shallow)));
  std::uint64_t above_a = reps, above_b = reps;
  double mean_a = 0, mean_b = 0;
  for (std::int64_t n = 0; n <= N; ++n) {
    above_a -= a.hist[n];
    above_b -= b.hist[n];
    CHECK(static_cast<double>(above_a) >= static_cast<double>(above_b) - 4 * std::sqrt(static_cast<double>(reps)));
    mean_a += static_cast<double>(above_a);
    mean_b += static_cast<double>(above_b);
  }
  // restricted means E[min(T, N)]
  CHECK(mean_a > mean_b);
  CHECK(b.logsurv_slope < 0);
  CHECK(a.spine_returns > 0);

  // fraction of slow walks among the living shrinks
  const auto& s = a.slow;
  REQUIRE(s.size() >= 5);
  CHECK(s[1].alive > 0);
  const double early = static_cast<double>(s[1].slow) / s[1].alive;
  const double late = static_cast<double>(s[4].slow) / std::max<std::uint64_t>(s[4].alive, 1);
  CHECK(late <= early);
}

TEST_CASE("deepest ray start") {
  auto in = build(3, 40, 5);
  auto tubes = in.tubes();
  for (int i : {1, 2}) {
    auto st = deepest_ray_start(tubes, i, in.core, 1);
    CHECK(tubes[st.tube].ray().forest == i);
    CHECK(tubes[st.tube].ray().anc[st.n] == st.x);
    CHECK(st.n >= 1);
    for (auto& t : tubes) {
      if (t.ray().forest != i) continue;
      for (std::size_t n = 1; n < t.ray().core_steps; ++n) CHECK(t.u(t.find(t.ray().anc[n])) <= st.u);
    }
    CHECK_THROWS_AS(deepest_ray_start(tubes, i, in.core, 1000), NoDeepRay);
  }
}
