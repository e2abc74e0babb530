#include "umbrella/invariants.hpp"

#include <cmath>
#include <sstream>

namespace umbrella {

namespace {
struct Tally {
  InvariantCount c;
  explicit Tally(std::string name) { c.name = std::move(name); }
  void check(bool ok, const Site& x) {
    ++c.checked;
    if (ok) return;
    if (c.violations++ == 0) {
      std::ostringstream os;
      os << x;
      c.witness = os.str();
    }
  }
};
}  // namespace

std::optional<std::int64_t> settled_u(const Tube& t, std::size_t k) {
  const auto u = t.u(k);
  const Site& x = t.site(k);
  for (const auto& o : l1_ball_offsets(t.dim(), u)) {
    if (l1_norm(o) != u) continue;
    const Site y = x + o;
    if (!t.contains(y) && certainly_outside(t.ray(), y)) return u;
  }
  return std::nullopt;
}

std::vector<InvariantCount> check_invariants(const InvariantInput& in) {
  const auto& p = *in.p;
  const int d = p.d;
  const auto c = solve_c20(d, p.beta);
  const double kap = kappa(d).value();
  Tally v_le_u("v <= u at settled sites"), lip("v 1-Lipschitz"), eq37("|x - z| <= 2H on certain H"),
      eq38("u <= c20 (depth along the ray)^beta, u = 1 at z"), chain("kappa^u <= p <= E on certain H"),
      depth1("E >= kappa at depth one");

  for (const auto& t : *in.tubes) {
    const auto& H = t.ray().forest == 1 ? *in.H1 : *in.H2;
    const auto& w = H.window();
    const int sgn = t.ray().forest == 1 ? 1 : -1;
    std::vector<std::vector<std::int64_t>> hz(t.size(), std::vector<std::int64_t>{0});
    for (std::size_t k = 0; k < t.size(); ++k) {
      const Site& x = t.site(k);
      const double v = v_and_n_partial(t.ray(), x).v;
      for (int code = 0; code < 2 * d; ++code) {
        const Site y = x + Direction::from_code(static_cast<std::uint8_t>(code)).unit(d);
        lip.check(std::abs(v - v_and_n_partial(t.ray(), y).v) <= 1.0 + 1e-12, x);
      }
      if (auto u = settled_u(t, k)) v_le_u.check(v <= static_cast<double>(*u), x);
      const auto along = sgn * (x - t.ray().z).coord_sum();
      if (along >= 1)
        eq38.check(static_cast<double>(t.u(k)) <= c.c20 * std::pow(static_cast<double>(along), p.beta), x);
      else if (x == t.ray().z)
        eq38.check(t.u(k) == 1, x);
      if (!w.contains(x) || !H.exact(w.index(x))) continue;
      const auto Hx = static_cast<std::int64_t>(H.value(w.index(x)));
      eq37.check(l1_dist(x, t.ray().z) <= 2 * Hx, x);
      hz[k] = {static_cast<std::int64_t>(std::ceil(in.c31 * static_cast<double>(Hx)))};
    }
    if (!in.env) continue;
    const auto r = tube_dp(t, hz);
    for (std::size_t k = 0; k < t.size(); ++k) {
      const Site& x = t.site(k);
      if (!w.contains(x) || !H.exact(w.index(x))) continue;
      const auto& e = r.at[k][0];
      chain.check(std::pow(kap, static_cast<double>(t.u(k))) <= e.p + 1e-12 && e.p <= e.E + 1e-12, x);
      if (t.u(k) == 1) depth1.check(e.E >= kap - 1e-12, x);
    }
  }

  std::vector<InvariantCount> out{v_le_u.c, lip.c, eq37.c, eq38.c};
  const auto dj = check_disjoint(in.I1->B, in.I2->B);
  InvariantCount disj{"B1, B2 disjoint on certain sites", in.I1->B.window().volume(), dj.certain_overlaps, ""};
  if (!dj.witnesses.empty()) {
    std::ostringstream os;
    os << dj.witnesses.front();
    disj.witness = os.str();
  }
  out.push_back(disj);
  out.push_back({"certain C inside certain B", in.I1->B.window().volume(), in.I1->c_outside_b + in.I2->c_outside_b, ""});
  if (!in.env) return out;

  InvariantCount sums{"rows sum to exactly 1", 0, 0, ""}, mins{"row min >= kappa, exactly kappa when r = s", 0, 0, ""};
  const Rational top(19, 20);
  for (const auto& row : in.env->rows) {
    ++sums.checked;
    ++mins.checked;
    if (row.sum() != Rational(1, 1)) ++sums.violations;
    bool r_eq_s = false;
    for (int code = 0; code < 2 * d; ++code) r_eq_s = r_eq_s || row.p[code] == top;
    if (row.min() < kappa(d) || (r_eq_s && row.min() != kappa(d))) ++mins.violations;
  }
  out.push_back(sums);
  out.push_back(mins);
  out.push_back(chain.c);
  out.push_back(depth1.c);
  const auto res = supermartingale_residuals(*in.env, kap);
  InvariantCount rc{"supermartingale residual <= 1e-9 at eligible sites", res.eligible, res.violations, ""};
  if (res.violations) {
    std::ostringstream os;
    os << res.witness;
    rc.witness = os.str();
  }
  out.push_back(rc);
  return out;
}

std::vector<InvariantCount> check_invariants(const Pipeline& pl) {
  const bool env = !pl.env.rows.empty();
  return check_invariants(
      InvariantInput{&pl.p, &pl.tubes, &pl.H1, &pl.H2, &pl.I1, &pl.I2, env ? &pl.env : nullptr, pl.c31.c31});
}

}  // namespace umbrella
