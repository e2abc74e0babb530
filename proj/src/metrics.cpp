#include "umbrella/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "umbrella/io.hpp"

namespace umbrella {

std::int32_t CensoredField::max_value() const {
  return value_.empty() ? 0 : *std::max_element(value_.begin(), value_.end());
}

void CensoredField::write(std::ostream& os, const char (&magic)[5]) const {
  io::put_magic(os, magic, 1);
  io::put_box(os, window_);
  io::put_array(os, value_);
  io::put_array(os, cens_);
}

CensoredField CensoredField::read(std::istream& is, const char (&magic)[5]) {
  if (io::expect_magic(is, magic) != 1) throw io::FormatError("unsupported dump version");
  CensoredField f(io::get_box(is));
  io::get_array(is, f.value_, f.window_.volume());
  io::get_array(is, f.cens_, f.window_.volume());
  return f;
}

HField compute_h(const Forest& forest) {
  const Box& w = forest.window();
  const int d = w.dim();
  const int zeta = forest.zeta();
  HField h(w);
  auto& val = h.values();
  auto& cens = h.censor_flags();
  // children enter through the lo faces when zeta = +1, the hi faces otherwise
  auto on_inflow = [&](const Site& x) {
    for (int j = 0; j < d; ++j)
      if (x[j] == (zeta > 0 ? w.lo()[j] : w.hi()[j])) return true;
    return false;
  };
  for_each_site(w, [&](std::size_t, const Site& x) {
    if (on_inflow(x)) cens[w.index(x)] = 1;
  });
  const std::size_t n = w.volume();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = zeta > 0 ? k : n - 1 - k;
    const std::size_t p = forest.parent_index(idx);
    if (p == Forest::npos) continue;
    val[p] = std::max(val[p], val[idx] + 1);
    cens[p] |= cens[idx];
  }
  return h;
}

std::int64_t ball_radius(std::int64_t h, double beta) {
  if (h <= 0) return 0;
  const double r = std::pow(static_cast<double>(h), beta);
  return static_cast<std::int64_t>(std::floor(r * (1 + 1e-12)));
}

std::vector<Site> l1_ball_offsets(int d, std::int64_t r) {
  std::vector<Site> out;
  for_each_site(Box::cube(d, -r, r), [&](std::size_t, const Site& o) {
    if (l1_norm(o) <= r) out.push_back(o);
  });
  return out;
}

HInsField compute_H(const HField& h, double beta) {
  if (!(beta > 0 && beta < 1)) throw std::invalid_argument("beta must lie in (0,1)");
  const Box& w = h.window();
  const int d = w.dim();
  HInsField H(w);
  auto& val = H.values();
  auto& cens = H.censor_flags();
  const std::int64_t hmax = h.max_value();
  const std::int64_t rmax = ball_radius(hmax, beta);

  std::vector<std::vector<Site>> balls;
  std::vector<std::vector<std::int64_t>> flat;
  for (std::int64_t r = 0; r <= rmax; ++r) {
    balls.push_back(l1_ball_offsets(d, r));
    std::vector<std::int64_t> f;
    for (auto& o : balls.back()) {
      std::int64_t k = 0;
      for (int j = 0; j < d; ++j) k += o[j] * w.stride(j);
      f.push_back(k);
    }
    flat.push_back(std::move(f));
  }

  auto stamp = [&](std::size_t idx, const Site& y, std::int64_t r, auto&& op) {
    if (w.depth(y) >= r) {
      for (auto off : flat[r]) op(static_cast<std::size_t>(static_cast<std::int64_t>(idx) + off));
    } else {
      for (auto& o : balls[r]) {
        const Site x = y + o;
        if (w.contains(x)) op(w.index(x));
      }
    }
  };

  for_each_site(w, [&](std::size_t idx, const Site& y) {
    const std::int32_t hy = h.value(idx);
    const std::int64_t r = ball_radius(hy, beta);
    stamp(idx, y, r, [&](std::size_t x) { val[x] = std::max(val[x], hy); });
    // a censored h may be larger than recorded; assume it stays below the window maximum
    if (!h.exact(idx)) stamp(idx, y, std::max(r, rmax), [&](std::size_t x) { cens[x] = 1; });
    if (w.depth(y) + 1 <= rmax) cens[idx] = 1;
  });
  return H;
}

std::vector<Site> ray(const Forest& forest, const Site& x, std::size_t max_steps) {
  std::vector<Site> out;
  if (!forest.window().contains(x)) return out;
  out.push_back(x);
  while (out.size() <= max_steps) {
    Site p = forest.parent(out.back());
    if (!forest.window().contains(p)) break;
    out.push_back(p);
  }
  return out;
}

void TailSamples::add(std::int64_t value, Status s) {
  auto& hist = s == Status::exact ? exact_ : cens_;
  const auto v = static_cast<std::size_t>(std::max<std::int64_t>(value, 0));
  if (hist.size() <= v) hist.resize(v + 1, 0);
  ++hist[v];
  ++total_;
}

void TailSamples::merge(const TailSamples& o) {
  auto add_hist = [](std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (std::size_t k = 0; k < b.size(); ++k) a[k] += b[k];
  };
  add_hist(exact_, o.exact_);
  add_hist(cens_, o.cens_);
  total_ += o.total_;
}

namespace {
std::uint64_t count_from(const std::vector<std::uint64_t>& h, std::int64_t n) {
  std::uint64_t c = 0;
  for (std::size_t k = static_cast<std::size_t>(std::max<std::int64_t>(n, 0)); k < h.size(); ++k) c += h[k];
  return c;
}
}  // namespace

std::uint64_t TailSamples::count_geq_lower(std::int64_t n) const { return count_from(exact_, n) + count_from(cens_, n); }

std::uint64_t TailSamples::count_geq_upper(std::int64_t n) const { return count_from(exact_, n) + count_from(cens_, 0); }

std::uint64_t TailSamples::censored() const { return count_from(cens_, 0); }

void add_interior(TailSamples& t, const CensoredField& f, std::int64_t buffer) {
  const Box inner = f.window().shrunk(buffer);
  for_each_site(inner, [&](std::size_t, const Site& x) {
    const auto idx = f.window().index(x);
    t.add(f.value(idx), f.status(idx));
  });
}

TailEstimate tail_estimate(const TailSamples& samples, const std::vector<std::int64_t>& grid, int d) {
  if (samples.total() == 0) throw std::invalid_argument("tail_estimate: empty sample");
  TailEstimate out;
  out.d = d;
  for (auto n : grid) {
    TailRow r;
    r.n = n;
    r.total = samples.total();
    r.count_lo = samples.count_geq_lower(n);
    r.count_hi = samples.count_geq_upper(n);
    r.p_lo = static_cast<double>(r.count_lo) / static_cast<double>(r.total);
    r.p_hi = static_cast<double>(r.count_hi) / static_cast<double>(r.total);
    r.ci = {wilson_interval(r.count_lo, r.total).lo, wilson_interval(r.count_hi, r.total).hi};
    const double s = std::pow(static_cast<double>(n), d - 1);
    r.scaled_lo = s * r.p_lo;
    r.scaled_hi = s * r.p_hi;
    out.rows.push_back(r);
  }
  return out;
}

void write_tails_csv(std::ostream& os, const TailEstimate& t) {
  os << "n,count_geq_lo,count_geq_hi,total,p_lo,p_hi,ci_lo,ci_hi,n_pow_dm1_p_lo,n_pow_dm1_p_hi\n";
  os.precision(10);
  for (auto& r : t.rows)
    os << r.n << ',' << r.count_lo << ',' << r.count_hi << ',' << r.total << ',' << r.p_lo << ',' << r.p_hi << ','
       << r.ci.lo << ',' << r.ci.hi << ',' << r.scaled_lo << ',' << r.scaled_hi << '\n';
}

Theorem1Constant theorem1_constant(int d, std::int64_t scan_to) {
  if (d < 2) throw std::invalid_argument("theorem1_constant needs d >= 2");
  Theorem1Constant out;
  std::vector<Rational> ratio;
  for (std::int64_t n = 1; n <= scan_to; ++n) {
    unsigned __int128 p = 1;
    for (int k = 0; k < d - 1; ++k) p *= static_cast<unsigned __int128>(n);
    if (p > UINT64_MAX) throw std::overflow_error("theorem1_constant scan overflows");
    ratio.emplace_back(static_cast<std::uint64_t>(p), sphere_count(d, n));
  }
  auto it = std::min_element(ratio.begin(), ratio.end());
  out.c1 = *it;
  out.argmin = (it - ratio.begin()) + 1;
  out.monotone_tail = std::is_sorted(it, ratio.end());
  return out;
}

}  // namespace umbrella
