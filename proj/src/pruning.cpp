#include "umbrella/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "umbrella/io.hpp"

namespace umbrella {

std::size_t Membership::count(Tri t) const {
  return static_cast<std::size_t>(std::count(s_.begin(), s_.end(), static_cast<std::uint8_t>(t)));
}

const char* tri_name(Tri t) {
  switch (t) {
    case Tri::in:
      return "IN";
    case Tri::out:
      return "OUT";
    default:
      return "UNKNOWN";
  }
}

namespace {

// Applies op(idx) to every window site of the closed l1 ball of radius r around y.
class BallStamper {
 public:
  explicit BallStamper(const Box& w) : w_(w) {}

  template <class Op>
  void operator()(const Site& y, std::int64_t r, Op&& op) {
    const auto& offs = offsets(r);
    if (w_.contains(y) && w_.depth(y) >= r) {
      const auto base = static_cast<std::int64_t>(w_.index(y));
      for (auto k : flat_[r]) op(static_cast<std::size_t>(base + k));
      return;
    }
    for (auto& o : offs) {
      const Site x = y + o;
      if (w_.contains(x)) op(w_.index(x));
    }
  }

  const std::vector<Site>& offsets(std::int64_t r) {
    while (static_cast<std::int64_t>(balls_.size()) <= r) {
      const auto k = static_cast<std::int64_t>(balls_.size());
      balls_.push_back(l1_ball_offsets(w_.dim(), k));
      std::vector<std::int64_t> f;
      for (auto& o : balls_.back()) {
        std::int64_t s = 0;
        for (int j = 0; j < w_.dim(); ++j) s += o[j] * w_.stride(j);
        f.push_back(s);
      }
      flat_.push_back(std::move(f));
    }
    return balls_[r];
  }

 private:
  Box w_;
  std::vector<std::vector<Site>> balls_;
  std::vector<std::vector<std::int64_t>> flat_;
};

void raise(Membership& m, std::size_t idx, Tri t) {
  const Tri cur = m.at(idx);
  if (cur == Tri::in) return;
  if (t == Tri::in || cur == Tri::out) m.set(idx, t);
}

}  // namespace

Membership tilde_T(const HField& h_i, const HInsField& H_j, double beta) {
  if (!(h_i.window() == H_j.window())) throw std::invalid_argument("tilde_T: fields on different windows");
  const Box& w = h_i.window();
  Membership out(w, Tri::out);
  BallStamper balls(w);
  for_each_site(w, [&](std::size_t idx, const Site& x) {
    if (!h_i.exact(idx)) {
      out.set(idx, Tri::unknown);
      return;
    }
    const std::int32_t hv = h_i.value(idx);
    const std::int64_t r = ball_radius(hv, beta);
    bool unknown = false, beaten = false;
    for (auto& o : balls.offsets(r)) {
      const Site y = x + o;
      if (!w.contains(y)) {
        unknown = true;
        continue;
      }
      const auto k = w.index(y);
      // a censored H is a lower bound, so H >= h settles OUT either way
      if (H_j.value(k) >= hv) {
        beaten = true;
        break;
      }
      if (!H_j.exact(k)) unknown = true;
    }
    out.set(idx, beaten ? Tri::out : unknown ? Tri::unknown : Tri::in);
  });
  return out;
}

Box default_core(const HField& h_i, const HField& h_j, double beta) {
  const std::int64_t band = ball_radius(h_i.max_value(), beta) + ball_radius(h_j.max_value(), beta) + 1;
  return h_i.window().shrunk(band);
}

Membership prune_to_infinite(const Forest& forest, const Membership& tildeT, const Box& core) {
  const Box& w = forest.window();
  if (!(tildeT.window() == w)) throw std::invalid_argument("prune_to_infinite: window mismatch");
  const std::size_t n = w.volume();
  std::vector<std::uint8_t> any_out(n, 0), any_unknown(n, 0), in_core(n, 0);
  for_each_site(w, [&](std::size_t idx, const Site& x) { in_core[idx] = core.contains(x); });
  Membership T(w, Tri::out);
  // parents have larger flat index when zeta = +1
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = forest.zeta() > 0 ? n - 1 - k : k;
    const std::size_t p = forest.parent_index(idx);
    const Tri t = tildeT.at(idx);
    any_out[idx] = t == Tri::out || (p != Forest::npos && any_out[p]);
    any_unknown[idx] = (in_core[idx] && t == Tri::unknown) || (p != Forest::npos && any_unknown[p]);
    if (any_out[idx])
      T.set(idx, Tri::out);
    else if (!in_core[idx] || any_unknown[idx])
      T.set(idx, Tri::unknown);
    else
      T.set(idx, Tri::in);
  }
  return T;
}

std::vector<DepthViolation> depth_violations(const Forest& forest, const Membership& tildeT, const Box& starts,
                                             const std::vector<std::int64_t>& ks, std::int64_t depth_cap) {
  const Box& w = forest.window();
  std::vector<DepthViolation> out;
  for (auto k : ks) out.push_back({k, 0, 0, 0});
  for_each_site(starts, [&](std::size_t, const Site& x0) {
    if (!w.contains(x0)) return;
    std::int64_t last_out = -1, last_possible = -1;
    std::size_t idx = w.index(x0);
    for (std::int64_t step = 0; step <= depth_cap; ++step) {
      if (idx == Forest::npos) return;  // line leaves the window before the cap
      const Tri t = tildeT.at(idx);
      if (t == Tri::out) last_out = last_possible = step;
      if (t == Tri::unknown) last_possible = step;
      idx = forest.parent_index(idx);
    }
    for (auto& r : out) {
      ++r.lines;
      r.certain += last_out >= r.k;
      r.possible += last_possible >= r.k;
    }
  });
  return out;
}

std::vector<Site> leaves(const Membership& T, const Forest& forest) {
  const Box& w = forest.window();
  std::vector<std::uint8_t> has_child(w.volume(), 0);
  for (std::size_t idx = 0; idx < w.volume(); ++idx) {
    if (!T.in(idx)) continue;
    const auto p = forest.parent_index(idx);
    if (p != Forest::npos) has_child[p] = 1;
  }
  std::vector<Site> out;
  for_each_site(w, [&](std::size_t idx, const Site& x) {
    if (T.in(idx) && !has_child[idx]) out.push_back(x);
  });
  return out;
}

double RayHandle::radius(std::size_t n) const {
  return n == 0 ? 0.0 : std::pow(static_cast<double>(n), beta);
}

std::int64_t RayHandle::int_radius(std::size_t n) const { return ball_radius(static_cast<std::int64_t>(n), beta); }

RayHandle make_ray(const Forest& forest, int forest_id, const Site& z, const Box& core, double beta) {
  RayHandle r;
  r.z = z;
  r.forest = forest_id;
  r.zeta = forest.zeta();
  r.beta = beta;
  Site x = z;
  while (core.contains(x)) {
    r.anc.push_back(x);
    x = forest.parent(x);
  }
  r.core_steps = r.anc.size();
  r.anc.push_back(x);
  return r;
}

Insulation insulate(const Membership& T, const HField& h, const Forest& forest, int forest_id, const Box& core,
                    double beta) {
  const Box& w = forest.window();
  Insulation out{Membership(w, Tri::out), Membership(w, Tri::out), {}, 0};
  BallStamper balls(w);
  const std::int64_t rmax = ball_radius(h.max_value(), beta);

  for_each_site(w, [&](std::size_t idx, const Site& x) {
    const Tri t = T.at(idx);
    if (t == Tri::out) return;
    const std::int64_t r = ball_radius(h.value(idx), beta);
    if (t == Tri::in) {
      balls(x, r, [&](std::size_t k) { out.B.set(k, Tri::in); });
    } else {
      balls(x, h.exact(idx) ? r : std::max(r, rmax), [&](std::size_t k) { raise(out.B, k, Tri::unknown); });
    }
  });
  // trees rooted outside the window may reach in
  for_each_site(w, [&](std::size_t idx, const Site& x) {
    if (w.depth(x) + 1 <= rmax) raise(out.B, idx, Tri::unknown);
  });

  for (const Site& z : leaves(T, forest)) {
    RayHandle ray = make_ray(forest, forest_id, z, core, beta);
    for (std::size_t n = 0; n < ray.core_steps; ++n)
      balls(ray.anc[n], ray.int_radius(n), [&](std::size_t k) { out.C.set(k, Tri::in); });
    out.rays.push_back(std::move(ray));
  }
  // rays from undecided leaves, or continuing past the core, may still cover these
  for_each_site(w, [&](std::size_t idx, const Site& x) {
    if (out.C.in(idx)) {
      out.c_outside_b += !out.B.in(idx);
      return;
    }
    if (out.B.at(idx) == Tri::out) return;
    const bool near_band = !core.contains(x) || core.depth(x) + 1 <= rmax;
    if (out.B.at(idx) == Tri::unknown || near_band) out.C.set(idx, Tri::unknown);
  });
  return out;
}

DisjointReport check_disjoint(const Membership& B1, const Membership& B2, std::size_t max_witnesses) {
  if (!(B1.window() == B2.window())) throw std::invalid_argument("check_disjoint: window mismatch");
  DisjointReport r;
  for_each_site(B1.window(), [&](std::size_t idx, const Site& x) {
    const Tri a = B1.at(idx), b = B2.at(idx);
    if (a == Tri::in && b == Tri::in) {
      ++r.certain_overlaps;
      if (r.witnesses.size() < max_witnesses) r.witnesses.push_back(x);
    } else if (a != Tri::out && b != Tri::out) {
      ++r.unknown_overlaps;
    }
  });
  return r;
}

std::optional<Site> alpha(const Site& x, const Membership& T1, const Membership& T2, const Forest& f1,
                          const Forest& f2) {
  if (T1.in(x)) return f1.parent(x);
  if (T2.in(x)) return f2.parent(x);
  return std::nullopt;
}

void write_membership(std::ostream& os, const std::vector<NamedLayer>& layers) {
  io::put_magic(os, "UMBM", 1);
  const Box w = layers.empty() ? Box() : layers.front().layer.window();
  if (layers.empty()) {
    io::put<std::uint32_t>(os, 0);
  } else {
    io::put_box(os, w);
  }
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(layers.size()));
  for (auto& nl : layers) {
    if (!(nl.layer.window() == w)) throw std::invalid_argument("write_membership: layers on different windows");
    io::put<std::uint32_t>(os, static_cast<std::uint32_t>(nl.name.size()));
    os.write(nl.name.data(), static_cast<std::streamsize>(nl.name.size()));
    const auto& s = nl.layer.states();
    std::vector<std::pair<std::uint8_t, std::uint64_t>> runs;
    for (auto v : s) {
      if (!runs.empty() && runs.back().first == v)
        ++runs.back().second;
      else
        runs.emplace_back(v, 1);
    }
    io::put<std::uint64_t>(os, runs.size());
    for (auto& [v, len] : runs) {
      io::put<std::uint8_t>(os, v);
      io::put<std::uint64_t>(os, len);
    }
  }
}

std::vector<NamedLayer> read_membership(std::istream& is) {
  if (io::expect_magic(is, "UMBM") != 1) throw io::FormatError("unsupported membership dump version");
  std::vector<NamedLayer> out;
  const auto pos = is.tellg();
  if (io::get<std::uint32_t>(is) == 0) {
    if (io::get<std::uint32_t>(is) != 0) throw io::FormatError("layers without a window");
    return out;
  }
  is.seekg(pos);
  const Box w = io::get_box(is);
  const auto count = io::get<std::uint32_t>(is);
  for (std::uint32_t l = 0; l < count; ++l) {
    const auto len = io::get<std::uint32_t>(is);
    if (len > 256) throw io::FormatError("layer name too long");
    std::string name(len, '\0');
    is.read(name.data(), len);
    const auto runs = io::get<std::uint64_t>(is);
    Membership m(w, Tri::out);
    std::size_t idx = 0;
    for (std::uint64_t r = 0; r < runs; ++r) {
      const auto v = io::get<std::uint8_t>(is);
      const auto n = io::get<std::uint64_t>(is);
      if (v > 2 || idx + n > w.volume()) throw io::FormatError("corrupt membership run");
      for (std::uint64_t k = 0; k < n; ++k) m.set(idx++, static_cast<Tri>(v));
    }
    if (idx != w.volume()) throw io::FormatError("membership runs do not cover the window");
    out.push_back({std::move(name), std::move(m)});
  }
  return out;
}

}  // namespace umbrella
