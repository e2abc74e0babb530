#include "umbrella/statistics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "umbrella/forest.hpp"
#include "umbrella/rng.hpp"

namespace umbrella {

MixingTable mixing_covariance(const MixingSpec& spec, const ReplicaGrid& grid, std::string target,
                              std::string functional) {
  if (spec.replicas < 2) throw std::invalid_argument("mixing_covariance: need at least 2 replicas");
  if (!spec.grid.contains(spec.base)) throw std::invalid_argument("mixing_covariance: base block leaves the grid");
  const std::size_t S = spec.shifts.size();
  for (auto& s : spec.shifts)
    if (!spec.grid.contains(Box(spec.base.lo() + s, spec.base.hi() + s)))
      throw std::invalid_argument("mixing_covariance: shift " + s.str() + " pushes the block out of the grid");

  const std::uint64_t R = spec.replicas;
  const double n = static_cast<double>(spec.base.volume());
  // per replica and shift: sum f(x), sum f(x+s), sum f(x) f(x+s)
  std::vector<double> a(R * S), b(R * S), c(R * S);
  std::vector<double> values;
  std::vector<std::size_t> offs(S);
  for (std::size_t k = 0; k < S; ++k) {
    offs[k] = spec.grid.index(spec.base.lo() + spec.shifts[k]) - spec.grid.index(spec.base.lo());
  }
  for (std::uint64_t r = 0; r < R; ++r) {
    values.assign(spec.grid.volume(), 0.0);
    grid(r, values);
    for_each_site(spec.base, [&](std::size_t, const Site& x) {
      const std::size_t i0 = spec.grid.index(x);
      const double f0 = values[i0];
      for (std::size_t k = 0; k < S; ++k) {
        const double fs = values[i0 + offs[k]];
        a[r * S + k] += f0;
        b[r * S + k] += fs;
        c[r * S + k] += f0 * fs;
      }
    });
  }

  MixingTable t;
  t.target = std::move(target);
  t.functional = std::move(functional);
  t.gamma = spec.gamma;
  t.replicas = R;
  t.pairs_per_replica = spec.base.volume();
  std::uint64_t required = 0;
  for (std::size_t k = 0; k < S; ++k) {
    double A = 0, B = 0, C = 0;
    for (std::uint64_t r = 0; r < R; ++r) {
      A += a[r * S + k];
      B += b[r * S + k];
      C += c[r * S + k];
    }
    auto cov = [&](double sa, double sb, double sc, double m) { return sc / m - (sa / m) * (sb / m); };
    const double N = n * static_cast<double>(R);
    MixingRow row;
    row.s = spec.shifts[k];
    row.s_l1 = l1_norm(row.s);
    row.cov = cov(A, B, C, N);
    std::vector<double> loo(R);
    double mean = 0;
    for (std::uint64_t r = 0; r < R; ++r) {
      loo[r] = cov(A - a[r * S + k], B - b[r * S + k], C - c[r * S + k], N - n);
      mean += loo[r];
    }
    mean /= static_cast<double>(R);
    double ss = 0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    row.stderr_ = std::sqrt(ss * static_cast<double>(R - 1) / static_cast<double>(R));
    row.ci = {row.cov - kZ95 * row.stderr_, row.cov + kZ95 * row.stderr_};
    row.s_pow_gamma_cov = std::pow(static_cast<double>(row.s_l1), spec.gamma) * std::abs(row.cov);
    if (spec.max_halfwidth > 0 && kZ95 * row.stderr_ > spec.max_halfwidth) {
      const double ratio = kZ95 * row.stderr_ / spec.max_halfwidth;
      required = std::max(required, static_cast<std::uint64_t>(std::ceil(static_cast<double>(R) * ratio * ratio)));
    }
    t.rows.push_back(row);
  }
  if (required > 0)
    throw InsufficientReplicas("mixing_covariance: interval half-width above " + std::to_string(spec.max_halfwidth) +
                                   "; about " + std::to_string(required) + " replicas required",
                               required);
  return t;
}

ReplicaGrid forest_axis_indicator(const ModelParams& p, std::uint64_t seed, const Box& grid, std::int64_t R, int axis,
                                  int zeta) {
  return [=](std::uint64_t r, std::vector<double>& values) {
    const auto f = build_forest(p, derive_seed(seed, "mixing", r), grid, zeta, R);
    for (std::size_t idx = 0; idx < values.size(); ++idx) values[idx] = f.axis(idx) == axis ? 1.0 : 0.0;
  };
}

ReplicaGrid pair_same_axis(const ModelParams& p, std::uint64_t seed, const Box& grid, std::int64_t R) {
  return [=](std::uint64_t r, std::vector<double>& values) {
    const auto key = derive_seed(seed, "mixing", r);
    const auto f1 = build_forest(p, derive_seed(key, "field", 1), grid, +1, R);
    const auto f2 = build_forest(p, derive_seed(key, "field", 2), grid, -1, R);
    for (std::size_t idx = 0; idx < values.size(); ++idx) values[idx] = f1.axis(idx) == f2.axis(idx) ? 1.0 : 0.0;
  };
}

void write_mixing_csv(std::ostream& os, const std::vector<MixingTable>& tables) {
  os << "target,functional,s_l1,cov,ci,s_pow_gamma_cov\n";
  os.precision(10);
  for (auto& t : tables)
    for (auto& r : t.rows)
      os << t.target << ',' << t.functional << ',' << r.s_l1 << ',' << r.cov << ',' << (r.ci.hi - r.cov) << ','
         << r.s_pow_gamma_cov << '\n';
}

ExponentFit exponent_fit(const TailEstimate& tail) {
  auto fit = [&](bool upper) {
    std::vector<double> xs, ys;
    for (auto& row : tail.rows) {
      const auto count = upper ? row.count_hi : row.count_lo;
      if (count == 0 || row.n <= 0) continue;
      xs.push_back(std::log(static_cast<double>(row.n)));
      ys.push_back(std::log(upper ? row.p_hi : row.p_lo));
    }
    if (xs.size() < 4)
      throw DegenerateGrid("exponent_fit: " + std::to_string(xs.size()) + " usable grid points in the " +
                           (upper ? "upper" : "lower") + " bracket, need 4");
    return least_squares(xs, ys);
  };
  return {fit(false), fit(true)};
}

// ---- report json ----

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ReportError(where + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ReportError(where + ": unknown field '" + it.key() + "'");
  for (auto* k : keys)
    if (!j.contains(k)) throw ReportError(where + ": missing field '" + std::string(k) + "'");
}

double finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ReportError(std::string("non-finite value in ") + what);
  return v;
}

json fit_json(const LineFit& f) {
  return {{"slope", finite(f.slope, "fit")},
          {"intercept", finite(f.intercept, "fit")},
          {"stderr", finite(f.slope_stderr, "fit")},
          {"points", f.points}};
}

LineFit fit_from(const json& j, const std::string& where) {
  check_keys(j, {"slope", "intercept", "stderr", "points"}, where);
  LineFit f;
  f.slope = j.at("slope").get<double>();
  f.intercept = j.at("intercept").get<double>();
  f.slope_stderr = j.at("stderr").get<double>();
  f.points = j.at("points").get<std::size_t>();
  return f;
}

json tail_json(const TailTable& t) {
  json rows = json::array();
  for (auto& r : t.estimate.rows)
    rows.push_back({{"n", r.n},
                    {"count_lo", r.count_lo},
                    {"count_hi", r.count_hi},
                    {"total", r.total},
                    {"p_lo", finite(r.p_lo, "tail")},
                    {"p_hi", finite(r.p_hi, "tail")},
                    {"ci_lo", finite(r.ci.lo, "tail")},
                    {"ci_hi", finite(r.ci.hi, "tail")},
                    {"scaled_lo", finite(r.scaled_lo, "tail")},
                    {"scaled_hi", finite(r.scaled_hi, "tail")}});
  json fit = nullptr;
  if (t.fit) fit = {{"lower", fit_json(t.fit->lower)}, {"upper", fit_json(t.fit->upper)}};
  return {{"label", t.label}, {"d", t.estimate.d}, {"rows", rows}, {"fit", fit}};
}

TailTable tail_from(const json& j) {
  check_keys(j, {"label", "d", "rows", "fit"}, "tails[]");
  TailTable t;
  t.label = j.at("label").get<std::string>();
  t.estimate.d = j.at("d").get<int>();
  for (auto& r : j.at("rows")) {
    check_keys(r, {"n", "count_lo", "count_hi", "total", "p_lo", "p_hi", "ci_lo", "ci_hi", "scaled_lo", "scaled_hi"},
               "tails[].rows[]");
    TailRow row;
    row.n = r.at("n").get<std::int64_t>();
    row.count_lo = r.at("count_lo").get<std::uint64_t>();
    row.count_hi = r.at("count_hi").get<std::uint64_t>();
    row.total = r.at("total").get<std::uint64_t>();
    row.p_lo = r.at("p_lo").get<double>();
    row.p_hi = r.at("p_hi").get<double>();
    row.ci = {r.at("ci_lo").get<double>(), r.at("ci_hi").get<double>()};
    row.scaled_lo = r.at("scaled_lo").get<double>();
    row.scaled_hi = r.at("scaled_hi").get<double>();
    t.estimate.rows.push_back(row);
  }
  const auto& f = j.at("fit");
  if (!f.is_null()) {
    check_keys(f, {"lower", "upper"}, "tails[].fit");
    t.fit = ExponentFit{fit_from(f.at("lower"), "fit.lower"), fit_from(f.at("upper"), "fit.upper")};
  }
  return t;
}

json mixing_json(const MixingTable& t) {
  json rows = json::array();
  for (auto& r : t.rows) {
    json s = json::array();
    for (int j = 0; j < r.s.dim(); ++j) s.push_back(r.s[j]);
    rows.push_back({{"s", s},
                    {"s_l1", r.s_l1},
                    {"cov", finite(r.cov, "mixing")},
                    {"stderr", finite(r.stderr_, "mixing")},
                    {"ci_lo", finite(r.ci.lo, "mixing")},
                    {"ci_hi", finite(r.ci.hi, "mixing")},
                    {"s_pow_gamma_cov", finite(r.s_pow_gamma_cov, "mixing")}});
  }
  return {{"target", t.target},
          {"functional", t.functional},
          {"gamma", t.gamma},
          {"replicas", t.replicas},
          {"pairs_per_replica", t.pairs_per_replica},
          {"rows", rows}};
}

MixingTable mixing_from(const json& j) {
  check_keys(j, {"target", "functional", "gamma", "replicas", "pairs_per_replica", "rows"}, "mixing[]");
  MixingTable t;
  t.target = j.at("target").get<std::string>();
  t.functional = j.at("functional").get<std::string>();
  t.gamma = j.at("gamma").get<double>();
  t.replicas = j.at("replicas").get<std::uint64_t>();
  t.pairs_per_replica = j.at("pairs_per_replica").get<std::uint64_t>();
  for (auto& r : j.at("rows")) {
    check_keys(r, {"s", "s_l1", "cov", "stderr", "ci_lo", "ci_hi", "s_pow_gamma_cov"}, "mixing[].rows[]");
    MixingRow row;
    const auto& s = r.at("s");
    row.s = Site(static_cast<int>(s.size()));
    for (std::size_t k = 0; k < s.size(); ++k) row.s[static_cast<int>(k)] = s[k].get<std::int64_t>();
    row.s_l1 = r.at("s_l1").get<std::int64_t>();
    row.cov = r.at("cov").get<double>();
    row.stderr_ = r.at("stderr").get<double>();
    row.ci = {r.at("ci_lo").get<double>(), r.at("ci_hi").get<double>()};
    row.s_pow_gamma_cov = r.at("s_pow_gamma_cov").get<double>();
    t.rows.push_back(row);
  }
  return t;
}

}  // namespace

std::string serialize_report(const Report& r) {
  json j;
  j["schema_version"] = Report::kSchemaVersion;
  j["params"] = r.params;
  j["seeds"] = r.seeds;
  json consts = json::object();
  for (auto& [k, v] : r.constants) consts[k] = finite(v, "constants");
  j["constants"] = consts;
  j["tails"] = json::array();
  for (auto& t : r.tails) j["tails"].push_back(tail_json(t));
  j["invariants"] = json::array();
  for (auto& i : r.invariants) j["invariants"].push_back({{"name", i.name}, {"status", i.status}, {"detail", i.detail}});
  j["traps"] = json::array();
  for (auto& t : r.traps)
    j["traps"].push_back({{"label", t.label},
                          {"forest", t.forest},
                          {"horizon", t.horizon},
                          {"effective_horizon", t.effective_horizon},
                          {"replicas", t.replicas},
                          {"survivors", t.survivors},
                          {"truncated", t.truncated},
                          {"ci_lo", finite(t.ci_lo, "traps")},
                          {"ci_hi", finite(t.ci_hi, "traps")},
                          {"drift_q05", finite(t.drift_q05, "traps")},
                          {"drift_median", finite(t.drift_median, "traps")}});
  j["mixing"] = json::array();
  for (auto& m : r.mixing) j["mixing"].push_back(mixing_json(m));
  json cens = json::object();
  for (auto& [k, v] : r.censoring) cens[k] = finite(v, "censoring");
  j["censoring"] = cens;
  return j.dump(2) + "\n";
}

Report parse_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ReportError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j, {"schema_version", "params", "seeds", "constants", "tails", "invariants", "traps", "mixing", "censoring"},
               "report");
    if (j.at("schema_version").get<int>() != Report::kSchemaVersion)
      throw ReportError("unsupported report schema version " + j.at("schema_version").dump());
    Report r;
    r.params = j.at("params").get<std::map<std::string, std::string>>();
    r.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    r.constants = j.at("constants").get<std::map<std::string, double>>();
    for (auto& t : j.at("tails")) r.tails.push_back(tail_from(t));
    for (auto& i : j.at("invariants")) {
      check_keys(i, {"name", "status", "detail"}, "invariants[]");
      InvariantRow row{i.at("name").get<std::string>(), i.at("status").get<std::string>(),
                       i.at("detail").get<std::string>()};
      if (row.status != "pass" && row.status != "fail" && row.status != "skipped")
        throw ReportError("invariants[]: bad status '" + row.status + "'");
      r.invariants.push_back(row);
    }
    for (auto& t : j.at("traps")) {
      check_keys(t, {"label", "forest", "horizon", "effective_horizon", "replicas", "survivors", "truncated", "ci_lo", "ci_hi",
                     "drift_q05", "drift_median"},
                 "traps[]");
      TrapRow row;
      row.label = t.at("label").get<std::string>();
      row.forest = t.at("forest").get<int>();
      row.horizon = t.at("horizon").get<std::int64_t>();
      row.effective_horizon = t.at("effective_horizon").get<std::int64_t>();
      row.replicas = t.at("replicas").get<std::uint64_t>();
      row.survivors = t.at("survivors").get<std::uint64_t>();
      row.truncated = t.at("truncated").get<std::uint64_t>();
      row.ci_lo = t.at("ci_lo").get<double>();
      row.ci_hi = t.at("ci_hi").get<double>();
      row.drift_q05 = t.at("drift_q05").get<double>();
      row.drift_median = t.at("drift_median").get<double>();
      r.traps.push_back(row);
    }
    for (auto& m : j.at("mixing")) r.mixing.push_back(mixing_from(m));
    r.censoring = j.at("censoring").get<std::map<std::string, double>>();
    return r;
  } catch (const json::exception& e) {
    throw ReportError(std::string("report has a malformed field: ") + e.what());
  }
}

}  // namespace umbrella
