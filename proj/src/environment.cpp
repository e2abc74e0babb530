#include "umbrella/environment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "umbrella/io.hpp"

namespace umbrella {

Rational TransitionRow::sum() const {
  Rational s(0, 1);
  for (int k = 0; k < 2 * d; ++k) s = s + p[k];
  return s;
}

Rational TransitionRow::min() const { return *std::min_element(p.begin(), p.begin() + 2 * d); }

std::array<double, 2 * kMaxDim> TransitionRow::as_double() const {
  std::array<double, 2 * kMaxDim> out{};
  for (int k = 0; k < 2 * d; ++k) out[k] = p[k].value();
  return out;
}

Rational kappa(int d) { return Rational(1, 20 * (2 * static_cast<std::uint64_t>(d) - 1)); }

TransitionRow uniform_row(int d) {
  TransitionRow r;
  r.d = d;
  for (int k = 0; k < 2 * d; ++k) r.p[k] = Rational(1, 2 * static_cast<std::uint64_t>(d));
  return r;
}

TransitionRow omega_row(int d, const Drift& rs) {
  TransitionRow row;
  row.d = d;
  const auto rc = rs.r.code(), sc = rs.s.code();
  const std::uint64_t others = 2 * static_cast<std::uint64_t>(d) - 1 - (rc != sc ? 1 : 0);
  const Rational rest(1, 20 * others);
  for (int k = 0; k < 2 * d; ++k) row.p[k] = rest;
  if (rc == sc) {
    row.p[rc] = Rational(19, 20);
  } else {
    row.p[rc] = Rational(3, 4);
    row.p[sc] = Rational(1, 5);
  }
  return row;
}

TransitionRow omega_z_row(const Tube& tube, const Site& x) {
  const auto k = tube.find(x);
  if (k == Tube::npos) return uniform_row(tube.dim());
  return omega_row(tube.dim(), tube.drift(k));
}

bool certainly_outside(const RayHandle& ray, const Site& y) {
  const auto K = static_cast<std::int64_t>(ray.core_steps);
  return l1_dist(y, ray.z) < K - ray.int_radius(ray.core_steps);
}

namespace {

constexpr std::int32_t kExit = -1;
constexpr std::int32_t kCensored = -2;

struct Stepper {
  int nd = 0;
  std::vector<double> w;         // member * nd
  std::vector<std::int32_t> nb;  // member * nd

  explicit Stepper(const Tube& tube) : nd(2 * tube.dim()) {
    const std::size_t K = tube.size();
    w.resize(K * nd);
    nb.resize(K * nd);
    for (std::size_t k = 0; k < K; ++k) {
      const auto row = omega_row(tube.dim(), tube.drift(k)).as_double();
      for (int c = 0; c < nd; ++c) {
        const Site y = tube.site(k) + Direction::from_code(static_cast<std::uint8_t>(c)).unit(tube.dim());
        const auto m = tube.find(y);
        w[k * nd + c] = row[c];
        nb[k * nd + c] = m != Tube::npos                            ? static_cast<std::int32_t>(m)
                         : certainly_outside(tube.ray(), y) ? kExit
                                                                     : kCensored;
      }
    }
  }
};

}  // namespace

TubeDPResult tube_dp(const Tube& tube, const std::vector<std::vector<std::int64_t>>& horizons,
                     const TubeDPOptions& opt) {
  const std::size_t K = tube.size();
  if (horizons.size() != K) throw std::invalid_argument("tube_dp: one horizon list per member required");
  const Stepper st(tube);
  const int nd = st.nd;

  TubeDPResult res;
  res.at.resize(K);
  std::map<std::int64_t, std::vector<std::pair<std::size_t, std::size_t>>> due;
  for (std::size_t k = 0; k < K; ++k) {
    res.at[k].resize(horizons[k].size());
    for (std::size_t j = 0; j < horizons[k].size(); ++j) {
      if (horizons[k][j] < 0) throw std::invalid_argument("tube_dp: negative horizon");
      due[horizons[k][j]].emplace_back(k, j);
    }
  }

  std::vector<double> s(K, 1.0), q(K, 0.0), e(K, 0.0), c(K, 0.0);
  std::vector<double> s2(K), q2(K), e2(K), c2(K);
  auto record = [&](std::int64_t m, std::size_t k, std::size_t j) {
    res.at[k][j] = {m, q[k], e[k], c[k]};
  };
  auto it = due.begin();
  std::int64_t m = 0;
  auto flush_upto = [&](std::int64_t upto) {
    while (it != due.end() && it->first <= upto) {
      for (auto [k, j] : it->second) record(it->first, k, j);
      ++it;
    }
  };
  flush_upto(0);
  while (true) {
    const double alive = K ? *std::max_element(s.begin(), s.end()) : 0.0;
    if (alive < opt.survival_floor) {
      res.converged = true;
      break;
    }
    if (m >= opt.max_steps) break;
    for (std::size_t k = 0; k < K; ++k) {
      double ns = 0, nq = 0, ne = 0, nc = 0;
      const double* wk = &st.w[k * nd];
      const std::int32_t* bk = &st.nb[k * nd];
      for (int a = 0; a < nd; ++a) {
        const double wa = wk[a];
        const std::int32_t b = bk[a];
        if (b >= 0) {
          ns += wa * s[b];
          nq += wa * q[b];
          ne += wa * (e[b] + q[b]);
          nc += wa * c[b];
        } else {
          nq += wa;
          ne += wa;
          if (b == kCensored) nc += wa;
        }
      }
      s2[k] = ns;
      q2[k] = nq;
      e2[k] = ne;
      c2[k] = nc;
    }
    s.swap(s2);
    q.swap(q2);
    e.swap(e2);
    c.swap(c2);
    ++m;
    flush_upto(m);
  }
  res.steps = m;
  // horizons past convergence see the limit
  flush_upto(INT64_MAX);
  res.final_state.resize(K);
  for (std::size_t k = 0; k < K; ++k) res.final_state[k] = {m, q[k], e[k], c[k]};
  return res;
}

ExitStats exit_functionals(const Tube& tube, const Site& x, std::int64_t M, const std::vector<std::int64_t>& Ns) {
  if (M < 0) throw std::invalid_argument("exit_functionals: negative horizon");
  ExitStats out;
  const auto k = tube.find(x);
  if (k == Tube::npos) {
    out.p = 1;
    out.E = 0;
    for (auto N : Ns) out.extra.push_back({N, 1, 0, 0});
    out.limit = {0, 1, 0, 0};
    return out;
  }
  std::vector<std::vector<std::int64_t>> hz(tube.size());
  hz[k].push_back(M);
  for (auto N : Ns) hz[k].push_back(N);
  auto r = tube_dp(tube, hz);
  out.p = r.at[k][0].p;
  out.E = r.at[k][0].E;
  out.extra.assign(r.at[k].begin() + 1, r.at[k].end());
  out.limit = r.final_state[k];
  return out;
}

C31Result choose_c31(const std::vector<Tube>& tubes, const std::vector<CalibrationPair>& pairs, double floor,
                     double kappa_value, int max_doublings) {
  // nothing to calibrate: the smallest candidate satisfies the vacuous condition
  if (pairs.empty()) return C31Result{floor, 0, 0, {}};
  // tail[j][pair] = E[T; c_j H < T] with c_j = floor * 2^j
  std::vector<std::vector<double>> tail(max_doublings + 1, std::vector<double>(pairs.size(), 0));
  std::vector<double> bound(pairs.size());
  std::map<std::size_t, std::vector<std::size_t>> by_tube;
  for (std::size_t a = 0; a < pairs.size(); ++a) by_tube[pairs[a].tube].push_back(a);
  for (auto& [t, idxs] : by_tube) {
    const Tube& tube = tubes.at(t);
    std::vector<std::vector<std::int64_t>> hz(tube.size());
    std::vector<std::size_t> first(pairs.size());
    for (auto a : idxs) {
      auto& list = hz.at(pairs[a].member);
      first[a] = list.size();
      for (int j = 0; j <= max_doublings; ++j)
        list.push_back(static_cast<std::int64_t>(std::ceil(std::ldexp(floor, j) * static_cast<double>(pairs[a].H))));
    }
    auto r = tube_dp(tube, hz);
    for (auto a : idxs) {
      const auto k = pairs[a].member;
      const double Einf = r.final_state[k].E;
      for (int j = 0; j <= max_doublings; ++j) tail[j][a] = std::max(0.0, Einf - r.at[k][first[a] + j].E);
      bound[a] = std::pow(kappa_value, static_cast<double>(tube.u(k)));
    }
  }
  C31Result out;
  for (int j = 0; j <= max_doublings; ++j) {
    double worst = -1e300;
    std::size_t wa = 0;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      const double ex = tail[j][a] - bound[a];
      if (ex > worst) {
        worst = ex;
        wa = a;
      }
    }
    out.worst_excess = worst;
    out.worst = pairs[wa];
    if (worst <= 0) {
      out.c31 = std::ldexp(floor, j);
      out.doublings = j;
      return out;
    }
  }
  const auto& w = out.worst;
  throw C31Failure("c31 scan exhausted after " + std::to_string(max_doublings) + " doublings; worst pair tube " +
                   std::to_string(w.tube) + " site " + tubes.at(w.tube).site(w.member).str() + " H " +
                   std::to_string(w.H) + " excess " + std::to_string(out.worst_excess));
}

PatchedEnv patch(const Box& window, const PatchInput& in, Selection sel) {
  if (!in.tubes || !in.H1 || !in.H2) throw std::invalid_argument("patch: missing inputs");
  const auto& tubes = *in.tubes;
  const int d = window.dim();
  PatchedEnv env;
  env.window = window;
  env.d = d;
  env.rows.push_back(uniform_row(d));
  const std::size_t n = window.volume();
  env.row_id.assign(n, 0);
  env.chosen.assign(n, -1);
  env.flagged.assign(n, 0);
  env.E.assign(n, 0.0);
  env.p.assign(n, 1.0);
  std::vector<std::uint16_t> drift_of(n, 0);  // r code * 16 + s code

  for (std::size_t t = 0; t < tubes.size(); ++t) {
    const Tube& tube = tubes[t];
    const HInsField& H = tube.ray().forest == 1 ? *in.H1 : *in.H2;
    std::vector<std::vector<std::int64_t>> hz(tube.size());
    for (std::size_t k = 0; k < tube.size(); ++k) {
      if (!window.contains(tube.site(k))) throw std::invalid_argument("patch: tube leaves the window");
      hz[k].push_back(static_cast<std::int64_t>(std::ceil(in.c31 * H.value(tube.site(k)))));
    }
    auto r = tube_dp(tube, hz);
    for (std::size_t k = 0; k < tube.size(); ++k) {
      const auto idx = window.index(tube.site(k));
      const bool censored = !H.exact(idx);
      const double E = r.at[k][0].E;
      bool take = env.chosen[idx] < 0;
      if (!take && !censored) {
        // tubes arrive in leaf order, so strict comparison keeps the lexicographic tie-break
        take = sel == Selection::argmin ? E < env.E[idx] : E > env.E[idx];
      }
      if (!take) continue;
      env.chosen[idx] = static_cast<std::int32_t>(t);
      env.flagged[idx] = censored;
      env.E[idx] = E;
      env.p[idx] = r.at[k][0].p;
      const auto& dr = tube.drift(k);
      drift_of[idx] = static_cast<std::uint16_t>(dr.r.code() * 16 + dr.s.code());
    }
  }
  std::map<std::uint16_t, std::uint16_t> row_of;
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (env.chosen[idx] < 0) continue;
    auto [it, fresh] = row_of.emplace(drift_of[idx], static_cast<std::uint16_t>(env.rows.size()));
    if (fresh) {
      Drift dr{Direction::from_code(drift_of[idx] / 16), Direction::from_code(drift_of[idx] % 16)};
      env.rows.push_back(omega_row(d, dr));
    }
    env.row_id[idx] = it->second;
  }
  return env;
}

Residuals supermartingale_residuals(const PatchedEnv& env, double kappa_value, double tol) {
  Residuals out;
  const int d = env.d;
  const Box& w = env.window;
  std::vector<std::array<double, 2 * kMaxDim>> rows;
  for (auto& r : env.rows) rows.push_back(r.as_double());
  for_each_site(w, [&](std::size_t idx, const Site& y) {
    if (env.chosen[idx] < 0 || env.flagged[idx] || !(env.E[idx] < kappa_value)) return;
    ++out.eligible;
    const auto& row = rows[env.row_id[idx]];
    double next = 0;
    for (int c = 0; c < 2 * d; ++c) {
      const Site x = y + Direction::from_code(static_cast<std::uint8_t>(c)).unit(d);
      // leaving every insulated ray means T = 0
      const double Ex = w.contains(x) ? env.E[w.index(x)] : 0.0;
      next += row[c] * Ex;
    }
    const double delta = next - env.E[idx];
    if (delta > out.worst) {
      out.worst = delta;
      out.witness = y;
    }
    out.violations += delta > tol;
  });
  return out;
}

void PatchedEnv::write(std::ostream& os) const {
  io::put_magic(os, "UMBE", 1);
  io::put_box(os, window);
  for (std::size_t idx = 0; idx < window.volume(); ++idx) {
    const auto& r = rows[row_id[idx]];
    for (int c = 0; c < 2 * d; ++c) {
      io::put<std::uint64_t>(os, r.p[c].num);
      io::put<std::uint64_t>(os, r.p[c].den);
    }
  }
}

PatchedEnv PatchedEnv::read(std::istream& is) {
  if (io::expect_magic(is, "UMBE") != 1) throw io::FormatError("unsupported environment dump version");
  PatchedEnv env;
  env.window = io::get_box(is);
  env.d = env.window.dim();
  env.rows.push_back(uniform_row(env.d));
  const std::size_t n = env.window.volume();
  env.row_id.assign(n, 0);
  env.chosen.assign(n, -1);
  env.flagged.assign(n, 0);
  env.E.assign(n, 0.0);
  env.p.assign(n, 1.0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    TransitionRow r;
    r.d = env.d;
    for (int c = 0; c < 2 * env.d; ++c) {
      const auto num = io::get<std::uint64_t>(is);
      const auto den = io::get<std::uint64_t>(is);
      if (den == 0) throw io::FormatError("zero denominator in environment dump");
      r.p[c] = Rational(num, den);
    }
    auto it = std::find(env.rows.begin(), env.rows.end(), r);
    if (it == env.rows.end()) {
      if (env.rows.size() >= 0xffff) throw io::FormatError("too many distinct rows");
      env.rows.push_back(r);
      it = env.rows.end() - 1;
    }
    env.row_id[idx] = static_cast<std::uint16_t>(it - env.rows.begin());
  }
  return env;
}

}  // namespace umbrella
