#include "umbrella/forest.hpp"

#include <algorithm>
#include <cmath>

#include "umbrella/io.hpp"
#include "umbrella/rng.hpp"

namespace umbrella {

LambdaValue lambda(const Site& x, int i, const LField& field, std::int64_t R, int zeta) {
  const int d = x.dim();
  if (R < 1) throw std::invalid_argument("truncation radius must be >= 1");
  Site klo(d), khi(d);
  for (int j = 0; j < d; ++j) {
    klo[j] = j == i ? 0 : 1;
    khi[j] = j == i ? 0 : R;
  }
  LambdaValue out{0.0, true};
  for_each_site(Box(klo, khi), [&](std::size_t, const Site& k) {
    Site y = x;
    for (int j = 0; j < d; ++j) y[j] -= zeta * k[j];
    if (!field.box().contains(y)) {
      out.exact = false;
      return;
    }
    const double L = field.at(y);
    if (static_cast<double>(linf_norm(k)) <= L) out.value = std::max(out.value, L);
  });
  if (out.value == 0.0) out = {1.0, false};
  return out;
}

LambdaVector lambda_vector(const Site& x, const LField& field, std::int64_t R, int zeta) {
  LambdaVector v;
  for (int i = 0; i < x.dim(); ++i) {
    auto l = lambda(x, i, field, R, zeta);
    v.value.push_back(l.value);
    v.exact.push_back(l.exact);
  }
  return v;
}

AxisChoice choose_direction(std::span<const double> lambdas) {
  AxisChoice c;
  for (int i = 1; i < static_cast<int>(lambdas.size()); ++i)
    if (lambdas[i] < lambdas[c.axis]) c.axis = i;
  c.tie = std::count(lambdas.begin(), lambdas.end(), lambdas[c.axis]) > 1;
  return c;
}

double lambda_miss_bound(const ModelParams& p, std::int64_t R) {
  const double d = p.d;
  const std::int64_t nmax = std::max<std::int64_t>(R + 1, 200000);
  double s = 0;
  for (std::int64_t n = std::max<std::int64_t>(R + 1, p.n0); n <= nmax; ++n) {
    const double nn = static_cast<double>(n);
    s += (std::pow(nn, d - 1) - std::pow(nn - 1, d - 1)) * p.theta * std::pow(nn, -d);
  }
  return s + p.theta * (d - 1) / static_cast<double>(nmax);
}

Forest::Forest(Box window, int zeta, std::vector<std::uint8_t> codes)
    : window_(std::move(window)), zeta_(zeta), codes_(std::move(codes)) {
  if (zeta != 1 && zeta != -1) throw std::invalid_argument("orientation must be +1 or -1");
  if (codes_.size() != window_.volume()) throw std::invalid_argument("forest size does not match window");
}

std::size_t Forest::parent_index(std::size_t idx) const {
  const Site x = window_.site(idx);
  const int a = axis(idx);
  const std::int64_t c = x[a] + zeta_;
  if (c < window_.lo()[a] || c > window_.hi()[a]) return npos;
  return zeta_ > 0 ? idx + static_cast<std::size_t>(window_.stride(a)) : idx - static_cast<std::size_t>(window_.stride(a));
}

std::size_t Forest::uncertain_count() const {
  return static_cast<std::size_t>(std::count_if(codes_.begin(), codes_.end(), [](auto c) { return (c & kUncertain) != 0; }));
}

void Forest::write(std::ostream& os) const {
  io::put_magic(os, "UMBA", 1);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(dim()));
  io::put<std::int8_t>(os, static_cast<std::int8_t>(zeta_));
  for (int j = 0; j < dim(); ++j) {
    io::put<std::int64_t>(os, window_.lo()[j]);
    io::put<std::int64_t>(os, window_.hi()[j]);
  }
  io::put_array(os, codes_);
}

Forest Forest::read(std::istream& is) {
  if (io::expect_magic(is, "UMBA") != 1) throw io::FormatError("unsupported UMBA version");
  auto d = static_cast<int>(io::get<std::uint32_t>(is));
  if (d < 1 || d > kMaxDim) throw io::FormatError("bad dimension in forest dump");
  int zeta = io::get<std::int8_t>(is);
  Site lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    lo[j] = io::get<std::int64_t>(is);
    hi[j] = io::get<std::int64_t>(is);
  }
  Box w(lo, hi);
  std::vector<std::uint8_t> codes;
  io::get_array(is, codes, w.volume());
  return Forest(w, zeta, std::move(codes));
}

namespace {

// Stamps max(L(y)) for every vertex y onto the part of the window its i-side covers.
// source(y, kmin) returns L(y), or 0 when L(y) < kmin is known (the stamp misses).
template <class Source>
void stamp_axis(const Box& fb, Source&& source, const Box& window, int zeta, std::int64_t R, int i,
                std::vector<double>& lam) {
  const int d = window.dim();
  // vertices whose i-side can reach the window
  Site ylo = window.lo(), yhi = window.hi();
  for (int j = 0; j < d; ++j) {
    if (j == i) continue;
    if (zeta > 0) {
      ylo[j] = window.lo()[j] - R;
      yhi[j] = window.hi()[j] - 1;
    } else {
      ylo[j] = window.lo()[j] + 1;
      yhi[j] = window.hi()[j] + R;
    }
  }
  for (int j = 0; j < d; ++j) {
    ylo[j] = std::max(ylo[j], fb.lo()[j]);
    yhi[j] = std::min(yhi[j], fb.hi()[j]);
  }
  const Box ybox(ylo, yhi);
  // innermost stamped axis: the last one that is not i
  const int inner = i == d - 1 ? d - 2 : d - 1;
  const std::int64_t inner_stride = window.stride(inner);

  std::array<std::int64_t, kMaxDim> lo{}, hi{}, cur{};
  for_each_site(ybox, [&](std::size_t, const Site& y) {
    std::int64_t kmin = 1;
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      kmin = std::max(kmin, zeta > 0 ? window.lo()[j] - y[j] : y[j] - window.hi()[j]);
    }
    const double L = source(y, kmin);
    if (L < static_cast<double>(kmin)) return;
    const std::int64_t m = std::min<std::int64_t>(static_cast<std::int64_t>(L), R);
    for (int j = 0; j < d; ++j) {
      if (j == i) {
        lo[j] = hi[j] = y[j];
        continue;
      }
      if (zeta > 0) {
        lo[j] = std::max(y[j] + 1, window.lo()[j]);
        hi[j] = std::min(y[j] + m, window.hi()[j]);
      } else {
        lo[j] = std::max(y[j] - m, window.lo()[j]);
        hi[j] = std::min(y[j] - 1, window.hi()[j]);
      }
      if (lo[j] > hi[j]) return;
    }
    cur = lo;
    const std::int64_t len = hi[inner] - lo[inner] + 1;
    while (true) {
      std::int64_t base = 0;
      for (int j = 0; j < d; ++j) base += (cur[j] - window.lo()[j]) * window.stride(j);
      double* p = lam.data() + base;
      for (std::int64_t k = 0; k < len; ++k, p += inner_stride) *p = std::max(*p, L);
      int j = d - 1;
      for (; j >= 0; --j) {
        if (j == inner || j == i) continue;
        if (cur[j] < hi[j]) {
          ++cur[j];
          break;
        }
        cur[j] = lo[j];
      }
      if (j < 0) break;
    }
  });
}

template <class Stamp>
Forest assemble(const Box& window, int zeta, Stamp&& stamp) {
  const int d = window.dim();
  if (d < 2) throw std::invalid_argument("forest needs d >= 2");
  const std::size_t n = window.volume();
  std::vector<double> best(n, 0.0), lam;
  std::vector<std::uint8_t> codes(n, 0);
  for (int i = 0; i < d; ++i) {
    lam.assign(n, 0.0);
    stamp(i, lam);
    for (std::size_t k = 0; k < n; ++k) {
      if (i == 0 || lam[k] < best[k]) {
        best[k] = lam[k];
        codes[k] = static_cast<std::uint8_t>(i);
      } else if (lam[k] == best[k]) {
        codes[k] |= Forest::kUncertain;
      }
    }
  }
  return Forest(window, zeta, std::move(codes));
}

}  // namespace

Forest build_forest(const LField& field, const Box& window, int zeta, std::int64_t R) {
  const int d = window.dim();
  if (R < 1) throw std::invalid_argument("truncation radius must be >= 1");
  // inflow-side margin check
  for (int j = 0; j < d; ++j) {
    const std::int64_t have = zeta > 0 ? window.lo()[j] - field.box().lo()[j] : field.box().hi()[j] - window.hi()[j];
    if (have < R)
      throw MarginError("truncation radius " + std::to_string(R) + " needs margin >= " + std::to_string(R) +
                        " on the inflow side of axis " + std::to_string(j) + ", field provides " +
                        std::to_string(have));
  }
  return assemble(window, zeta, [&](int i, std::vector<double>& lam) {
    stamp_axis(field.box(), [&](const Site& y, std::int64_t) { return field.at(y); }, window, zeta, R, i, lam);
  });
}

Forest build_forest(const ModelParams& p, std::uint64_t key, const Box& window, int zeta, std::int64_t R) {
  if (window.dim() != p.d) throw std::invalid_argument("window dimension does not match parameters");
  if (R < 1) throw std::invalid_argument("truncation radius must be >= 1");
  // u <= theta k^-d  <=>  L >= k on the tail branch
  std::vector<double> thresh(static_cast<std::size_t>(R) + 2, 1.0);
  for (std::int64_t k = p.n0; k <= R + 1; ++k) thresh[k] = p.theta * std::pow(static_cast<double>(k), -p.d) * (1 + 1e-9);
  const Box everywhere = window.expanded(R);
  return assemble(window, zeta, [&](int i, std::vector<double>& lam) {
    stamp_axis(
        everywhere,
        [&](const Site& y, std::int64_t kmin) {
          const double u = to_open_unit(hash_site(key, y));
          if (kmin > p.n0 && u > thresh[std::min<std::int64_t>(kmin, R + 1)]) return 0.0;
          return sample_L_from_uniform(u, p);
        },
        window, zeta, R, i, lam);
  });
}

Forest example1_forest(std::uint64_t seed, const Box& window, int zeta) {
  const int d = window.dim();
  std::vector<std::uint8_t> codes(window.volume());
  for_each_site(window, [&](std::size_t idx, const Site& x) {
    const auto h = static_cast<unsigned __int128>(hash_site(seed, x)) * static_cast<unsigned>(d);
    codes[idx] = static_cast<std::uint8_t>(h >> 64);
  });
  return Forest(window, zeta, std::move(codes));
}

}  // namespace umbrella
