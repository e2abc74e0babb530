#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <new>
#include <sstream>

#include "manifest.hpp"
#include "run_config.hpp"
#include "umbrella/invariants.hpp"
#include "umbrella/oracle.hpp"
#include "umbrella/pipeline.hpp"
#include "umbrella/rng.hpp"
#include "umbrella/statistics.hpp"
#include "umbrella/walker.hpp"

namespace fs = std::filesystem;
using namespace umbrella;

namespace {

constexpr int kOk = 0, kInvariant = 1, kUsage = 2, kBudget = 3;
constexpr int kStageVersion = 1;

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Ctx {
  cli::RunConfig cfg;
  cli::Manifest manifest;
  std::string hash;
  std::vector<std::string> written;

  fs::path path(const std::string& name) const { return cfg.out / name; }

  void write(const std::string& name, const std::function<void(std::ostream&)>& fill) {
    std::ofstream os(path(name), std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path(name).string());
    fill(os);
    if (!os) throw std::runtime_error("write failed on " + path(name).string());
    written.push_back(name);
  }
  void fragment(const std::string& stage, const Report& r) {
    write(stage + ".report.json", [&](std::ostream& os) { os << serialize_report(r); });
  }
  std::ifstream open(const std::string& stage, const std::string& name) const {
    return std::ifstream(manifest.verified(stage, name), std::ios::binary);
  }
  void commit(const std::string& stage) {
    manifest.record(stage, kStageVersion, hash, written);
    manifest.save();
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

InvariantRow invariant(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok ? "pass" : "fail", std::move(detail)};
}

int status_of(const std::vector<InvariantRow>& rows) {
  for (const auto& r : rows)
    if (r.status == "fail") {
      std::cerr << "invariant failed: " << r.name << " (" << r.detail << ")\n";
      return kInvariant;
    }
  return kOk;
}

void check_budget(const cli::RunConfig& c) {
  if (c.window().volume() > c.site_budget)
    throw BudgetExceeded("window has " + std::to_string(c.window().volume()) + " sites, budget " +
                         std::to_string(c.site_budget));
}

// ---- stages ----

int run_validate(Ctx& ctx) {
  const auto& p = ctx.cfg.p;
  const auto v = validate_params(p);
  for (const auto& x : v) std::cerr << "invalid parameters: " << x.rule << ": " << x.detail << "\n";
  if (!v.empty()) return kUsage;
  check_budget(ctx.cfg);
  const auto c1 = theorem1_constant(p.d);
  const auto c = solve_c20(p.d, p.beta);
  std::cout << "d=" << p.d << " gamma=" << fmt(p.gamma) << " theta=" << fmt(p.theta) << " n0=" << p.n0
            << " beta=" << fmt(p.beta) << " kappa=" << kappa(p.d).str() << " c1=" << c1.c1.str() << "\n";
  std::cout << "c20=" << fmt(c.c20) << " c22=" << fmt(c.c22) << " c21=" << fmt(c21_from(c, p.beta)) << "\n";
  std::cout << "config_hash=" << ctx.hash << "\n";

  Report r;
  std::istringstream is(ctx.cfg.canonical());
  for (std::string line; std::getline(is, line);) {
    const auto eq = line.find('=');
    r.params[line.substr(0, eq)] = line.substr(eq + 1);
  }
  r.seeds["root"] = ctx.cfg.seed;
  r.seeds["field_1"] = derive_seed(ctx.cfg.seed, "field", 1);
  r.seeds["field_2"] = derive_seed(ctx.cfg.seed, "field", 2);
  r.constants = {{"c1", c1.c1.value()}, {"kappa", kappa(p.d).value()}, {"c20", c.c20}, {"c22", c.c22},
                 {"c21", c21_from(c, p.beta)}};
  ctx.fragment("validate", r);
  ctx.commit("validate");
  return kOk;
}

int run_gen(Ctx& ctx) {
  ctx.manifest.require("validate", ctx.hash);
  const auto& c = ctx.cfg;
  const Box outer = c.window().expanded(c.radius());
  ctx.write("gen.csv", [&](std::ostream& os) {
    os << "forest,key,mode,sites,tail_mass\n";
    for (int i : {1, 2}) {
      const auto key = derive_seed(c.seed, "field", static_cast<std::uint64_t>(i));
      const bool dump = outer.volume() <= c.field_dump_budget;
      os << i << "," << key << "," << (dump ? "dumped" : "lazy") << "," << outer.volume() << ","
         << fmt(c.p.tail_mass()) << "\n";
      if (dump) {
        const auto f = generate_field(c.p, outer, key);
        ctx.write("field_" + std::to_string(i) + ".umbf", [&](std::ostream& fs) { f.write(fs); });
      }
    }
  });
  ctx.commit("gen");
  return kOk;
}

Forest load_forest(const Ctx& ctx, int i) {
  auto in = ctx.open("forest", "forest_" + std::to_string(i) + ".umba");
  return Forest::read(in);
}
CensoredField load_field(const Ctx& ctx, const std::string& name, const char (&magic)[5]) {
  auto in = ctx.open("metrics", name);
  return CensoredField::read(in, magic);
}

int run_forest(Ctx& ctx) {
  const auto& gen = ctx.manifest.require("gen", ctx.hash);
  const auto& c = ctx.cfg;
  std::vector<Forest> fs;
  for (int i : {1, 2}) {
    const int zeta = i == 1 ? +1 : -1;
    const std::string dump = "field_" + std::to_string(i) + ".umbf";
    bool dumped = false;
    for (const auto& a : gen.artifacts) dumped = dumped || a.name == dump;
    if (dumped) {
      std::ifstream in(ctx.manifest.verified("gen", dump), std::ios::binary);
      fs.push_back(build_forest(LField::read(in), c.window(), zeta, c.radius()));
    } else {
      fs.push_back(build_forest(c.p, derive_seed(c.seed, "field", static_cast<std::uint64_t>(i)), c.window(), zeta,
                                c.radius()));
    }
    ctx.write("forest_" + std::to_string(i) + ".umba", [&](std::ostream& os) { fs.back().write(os); });
  }
  ctx.write("forest.csv", [&](std::ostream& os) {
    os << "forest,zeta,axis,count,uncertain\n";
    for (int i : {1, 2}) {
      const auto& f = fs[i - 1];
      std::vector<std::uint64_t> n(f.dim(), 0), u(f.dim(), 0);
      for (std::size_t idx = 0; idx < f.window().volume(); ++idx) {
        ++n[f.axis(idx)];
        u[f.axis(idx)] += f.uncertain(idx);
      }
      for (int j = 0; j < f.dim(); ++j) os << i << "," << f.zeta() << "," << j << "," << n[j] << "," << u[j] << "\n";
    }
  });
  ctx.commit("forest");
  return kOk;
}

double censored_fraction(const CensoredField& f) {
  std::uint64_t n = 0;
  for (auto c : f.censor_flags()) n += c;
  return static_cast<double>(n) / static_cast<double>(std::max<std::size_t>(f.censor_flags().size(), 1));
}

std::vector<std::int64_t> tail_grid(int d) {
  return d == 2 ? std::vector<std::int64_t>{4, 8, 16, 32, 64, 128} : std::vector<std::int64_t>{2, 4, 8, 16, 32, 64};
}

int run_metrics(Ctx& ctx) {
  ctx.manifest.require("forest", ctx.hash);
  const auto& c = ctx.cfg;
  Report r;
  TailSamples ts;
  for (int i : {1, 2}) {
    const auto f = load_forest(ctx, i);
    const auto h = compute_h(f);
    const auto H = compute_H(h, c.p.beta);
    const auto s = std::to_string(i);
    ctx.write("h_" + s + ".umbh", [&](std::ostream& os) { h.write(os, "UMBH"); });
    ctx.write("H_" + s + ".umbi", [&](std::ostream& os) { H.write(os, "UMBI"); });
    add_interior(ts, h, c.side / 4);
    r.censoring["h_" + s] = censored_fraction(h);
    r.censoring["H_" + s] = censored_fraction(H);
  }
  const auto est = tail_estimate(ts, tail_grid(c.p.d), c.p.d);
  ctx.write("h_tails.csv", [&](std::ostream& os) { write_tails_csv(os, est); });
  ctx.fragment("metrics", r);
  ctx.commit("metrics");
  return kOk;
}

struct Geometry {
  Forest f1, f2;
  HField h1, h2;
  HInsField H1, H2;
  Box core;
  Insulation I1, I2;
  std::vector<Tube> tubes;
};

// T from the prune dump; insulation is recomputed from it.
Geometry load_geometry(const Ctx& ctx) {
  const double beta = ctx.cfg.p.beta;
  Geometry g;
  g.f1 = load_forest(ctx, 1);
  g.f2 = load_forest(ctx, 2);
  g.h1 = load_field(ctx, "h_1.umbh", "UMBH");
  g.h2 = load_field(ctx, "h_2.umbh", "UMBH");
  g.H1 = load_field(ctx, "H_1.umbi", "UMBI");
  g.H2 = load_field(ctx, "H_2.umbi", "UMBI");
  g.core = default_core(g.h1, g.h2, beta);
  auto in = ctx.open("prune", "membership.umbm");
  Membership T1, T2;
  for (auto& l : read_membership(in)) {
    if (l.name == "T1") T1 = std::move(l.layer);
    if (l.name == "T2") T2 = std::move(l.layer);
  }
  g.I1 = insulate(T1, g.h1, g.f1, 1, g.core, beta);
  g.I2 = insulate(T2, g.h2, g.f2, 2, g.core, beta);
  for (const auto* I : {&g.I1, &g.I2})
    for (const auto& ray : I->rays) g.tubes.emplace_back(ray, ctx.cfg.p.d);
  return g;
}

int run_prune(Ctx& ctx) {
  ctx.manifest.require("metrics", ctx.hash);
  const double beta = ctx.cfg.p.beta;
  const auto f1 = load_forest(ctx, 1), f2 = load_forest(ctx, 2);
  const auto h1 = load_field(ctx, "h_1.umbh", "UMBH"), h2 = load_field(ctx, "h_2.umbh", "UMBH");
  const auto H1 = load_field(ctx, "H_1.umbi", "UMBI"), H2 = load_field(ctx, "H_2.umbi", "UMBI");
  const auto tt1 = tilde_T(h1, H2, beta), tt2 = tilde_T(h2, H1, beta);
  const auto core = default_core(h1, h2, beta);
  const auto T1 = prune_to_infinite(f1, tt1, core), T2 = prune_to_infinite(f2, tt2, core);
  const auto I1 = insulate(T1, h1, f1, 1, core, beta), I2 = insulate(T2, h2, f2, 2, core, beta);
  const auto dj = check_disjoint(I1.B, I2.B);

  std::vector<NamedLayer> layers{{"tT1", tt1}, {"tT2", tt2}, {"T1", T1}, {"T2", T2},
                                 {"B1", I1.B}, {"B2", I2.B}, {"C1", I1.C}, {"C2", I2.C}};
  ctx.write("membership.umbm", [&](std::ostream& os) { write_membership(os, layers); });
  ctx.write("prune.csv", [&](std::ostream& os) {
    os << "layer,in,unknown,out\n";
    for (const auto& l : layers)
      os << l.name << "," << l.layer.count(Tri::in) << "," << l.layer.count(Tri::unknown) << ","
         << l.layer.count(Tri::out) << "\n";
  });
  const auto dv = depth_violations(f1, tt1, f1.window(), {4, 8, 16, 32, 64}, 64);
  ctx.write("depth.csv", [&](std::ostream& os) {
    os << "k,certain,possible,lines\n";
    for (const auto& v : dv) os << v.k << "," << v.certain << "," << v.possible << "," << v.lines << "\n";
  });

  Report r;
  r.invariants.push_back(invariant("B1, B2 disjoint on certain sites", dj.disjoint(),
                                   std::to_string(dj.certain_overlaps) + " certain, " +
                                       std::to_string(dj.unknown_overlaps) + " unknown overlaps"));
  r.invariants.push_back(invariant("certain C inside certain B", I1.c_outside_b + I2.c_outside_b == 0,
                                   std::to_string(I1.c_outside_b + I2.c_outside_b) + " sites"));
  ctx.fragment("prune", r);
  ctx.commit("prune");
  std::cout << "rays " << I1.rays.size() << " + " << I2.rays.size() << ", core " << core.volume() << " sites\n";
  return status_of(r.invariants);
}

int run_env(Ctx& ctx) {
  ctx.manifest.require("prune", ctx.hash);
  const auto& p = ctx.cfg.p;
  const auto g = load_geometry(ctx);
  const auto c = solve_c20(p.d, p.beta);
  const double c21 = c21_from(c, p.beta);
  const double kap = kappa(p.d).value();
  const auto cr = choose_c31(g.tubes, calibration_pairs(g.tubes, g.H1, g.H2), std::max(c21, 1.0), kap);
  const PatchInput in{&g.tubes, &g.H1, &g.H2, cr.c31};
  const auto env = patch(g.f1.window(), in);
  ctx.write("env.umbe", [&](std::ostream& os) { env.write(os); });

  const auto res = supermartingale_residuals(env, kap);
  ctx.write("env.csv", [&](std::ostream& os) {
    os << "key,value\n"
       << "c20," << fmt(c.c20) << "\nc21," << fmt(c21) << "\nc31," << fmt(cr.c31) << "\nc31_doublings,"
       << cr.doublings << "\nrows," << env.rows.size() << "\ntubes," << g.tubes.size() << "\neligible,"
       << res.eligible << "\nresidual_violations," << res.violations << "\n";
  });

  Report r;
  r.constants = {{"c31", cr.c31}};
  for (const auto& row : check_invariants(InvariantInput{&p, &g.tubes, &g.H1, &g.H2, &g.I1, &g.I2, &env, cr.c31}))
    r.invariants.push_back(invariant(row.name, row.violations == 0,
                                     std::to_string(row.violations) + " of " + std::to_string(row.checked) +
                                         (row.witness.empty() ? "" : ", first at " + row.witness)));
  ctx.fragment("env", r);
  ctx.commit("env");
  return status_of(r.invariants);
}

int run_walk(Ctx& ctx) {
  ctx.manifest.require("env", ctx.hash);
  const auto& c = ctx.cfg;
  const auto g = load_geometry(ctx);
  auto ein = ctx.open("env", "env.umbe");
  const auto env = PatchedEnv::read(ein);
  const auto uniform = uniform_env(env.window);
  Report r;
  std::ostringstream trap;
  trap << "forest,environment,start,u,horizon,effective_horizon,replicas,survivors,truncated,ci_lo,ci_hi,drift_q05,drift_median\n";
  for (int i : {1, 2}) {
    StartSite st;
    try {
      st = deepest_ray_start(g.tubes, i, g.core, 1);
    } catch (const NoDeepRay& e) {
      std::cerr << "forest " << i << ": " << e.what() << "\n";
      continue;
    }
    const auto& C = i == 1 ? g.I1.C : g.I2.C;
    const WalkConfig wc{st.x, c.horizon, static_cast<std::int64_t>(c.replicas),
                        derive_seed(c.seed, "walk", static_cast<std::uint64_t>(i)), i};
    for (const bool control : {false, true}) {
      const auto est = trap_probability(control ? uniform : env, C, g.core, wc);
      const auto ds = drift_on_survival(est);
      const std::string label = control ? "uniform" : "patched";
      trap << i << "," << label << "," << st.x << "," << st.u << "," << c.horizon << "," << est.effective_horizon
           << "," << est.replicas << "," << est.survivors << "," << est.truncated << "," << fmt(est.survival_ci.lo) << ","
           << fmt(est.survival_ci.hi) << "," << fmt(ds.q05) << "," << fmt(ds.median) << "\n";
      r.traps.push_back({"forest " + std::to_string(i) + " " + label, i, c.horizon, est.effective_horizon,
                         est.replicas, est.survivors, est.truncated, est.survival_ci.lo, est.survival_ci.hi, ds.q05, ds.median});
      if (!control)
        ctx.write("walks_" + std::to_string(i) + ".csv", [&](std::ostream& os) { write_walks_csv(os, est); });
    }
  }
  ctx.write("trap.csv", [&](std::ostream& os) { os << trap.str(); });
  ctx.fragment("walk", r);
  ctx.commit("walk");
  std::cout << trap.str();
  return kOk;
}

int run_tails(Ctx& ctx) {
  ctx.manifest.require("validate", ctx.hash);
  const auto& c = ctx.cfg;
  const std::int64_t side = c.tail_side > 0 ? c.tail_side : c.side;
  const Box w = Box::cube(c.p.d, 0, side - 1);
  TailSamples umb, ex1;
  for (std::uint64_t rep = 0; rep < c.tail_replicas; ++rep) {
    add_interior(umb, compute_h(build_forest(c.p, derive_seed(c.seed, "tails", rep), w, +1, c.radius())), side / 4);
    add_interior(ex1, compute_h(example1_forest(derive_seed(c.seed, "tails-example1", rep), w)), side / 4);
  }
  Report r;
  for (auto [label, samples] : {std::pair{"umbrella", &umb}, std::pair{"example1", &ex1}}) {
    TailTable t{label, tail_estimate(*samples, tail_grid(c.p.d), c.p.d), std::nullopt};
    try {
      t.fit = exponent_fit(t.estimate);
    } catch (const DegenerateGrid& e) {
      std::cerr << label << ": " << e.what() << "\n";
    }
    ctx.write(std::string("tails_") + label + ".csv", [&](std::ostream& os) { write_tails_csv(os, t.estimate); });
    if (t.fit)
      std::cout << label << " slope " << fmt(t.fit->upper.slope) << " +- " << fmt(t.fit->upper.slope_stderr) << "\n";
    r.tails.push_back(std::move(t));
  }
  ctx.fragment("tails", r);
  ctx.commit("tails");
  return kOk;
}

int run_mixing(Ctx& ctx) {
  ctx.manifest.require("validate", ctx.hash);
  const auto& c = ctx.cfg;
  const int d = c.p.d;
  MixingSpec spec;
  Site hi(d);
  for (int j = 0; j < d; ++j) hi[j] = 15;
  spec.base = Box(Site(d), hi);
  hi[0] += 64;
  spec.grid = Box(Site(d), hi);
  for (std::int64_t s : {8, 16, 32, 64}) {
    Site sh(d);
    sh[0] = s;
    spec.shifts.push_back(sh);
  }
  spec.replicas = c.mixing_replicas;
  spec.gamma = 1;
  std::vector<MixingTable> tables{mixing_covariance(
      spec, forest_axis_indicator(c.p, c.seed, spec.grid,
                                   c.mixing_radius > 0 ? c.mixing_radius : default_radius(spec.grid), 0), "forest", "a_is_e1")};
  if (c.omega_replicas > 0) {
    // omega on a patched d-dimensional window long enough along axis 0 for the shifts
    Site lo(d), whi(d);
    for (int j = 0; j < d; ++j) whi[j] = 39;
    whi[0] = 119;
    const Box window(lo, whi);
    MixingSpec os = spec;
    Site blo(d), bhi(d);
    for (int j = 0; j < d; ++j) {
      blo[j] = 16;
      bhi[j] = 23;
    }
    os.base = Box(blo, bhi);
    bhi[0] += 64;
    os.grid = Box(blo, bhi);
    os.replicas = c.omega_replicas;
    os.gamma = 1.0 / 13;
    tables.push_back(mixing_covariance(
        os, omega_indicator(c.p, c.seed, window, os.grid, Direction{0, +1}, Rational(3, 4)), "omega", "w_e1_ge_3/4"));
  }
  ctx.write("mixing.csv", [&](std::ostream& os) { write_mixing_csv(os, tables); });
  Report r;
  r.mixing = tables;
  ctx.fragment("mixing", r);
  ctx.commit("mixing");
  return kOk;
}

int run_oracle(Ctx& ctx) {
  const auto r = oracle::run_suite(ctx.cfg.max_box, ctx.cfg.seed);
  ctx.write("oracle.csv", [&](std::ostream& os) {
    os << "check,compared,mismatches\n";
    for (auto [name, n] : {std::pair{"lambda", r.lambda}, {"axis", r.axis}, {"h", r.h}, {"H", r.H}, {"u", r.u}, {"dp", r.dp}}) {
      std::uint64_t bad = 0;
      for (const auto& m : r.mismatches) bad += m.what.rfind(name, 0) == 0;
      os << name << "," << n << "," << bad << "\n";
    }
  });
  for (const auto& m : r.mismatches) std::cerr << "mismatch " << m.what << " at " << m.where << "\n";
  Report rep;
  rep.invariants.push_back(invariant("brute-force oracle suite up to side " + std::to_string(ctx.cfg.max_box), r.ok(),
                                     std::to_string(r.mismatches.size()) + " mismatches over " +
                                         std::to_string(r.lambda + r.axis + r.h + r.H + r.u + r.dp) + " comparisons"));
  ctx.fragment("oracle", rep);
  ctx.commit("oracle");
  std::cout << (r.ok() ? "oracle: all comparisons match\n" : "oracle: mismatches found\n");
  return r.ok() ? kOk : kInvariant;
}

int run_report(Ctx& ctx) {
  ctx.manifest.require("validate", ctx.hash);
  Report all;
  for (const auto& s : ctx.manifest.stages()) {
    if (s.config_hash != ctx.hash) continue;
    const std::string name = s.stage + ".report.json";
    bool has = false;
    for (const auto& a : s.artifacts) has = has || a.name == name;
    if (!has) continue;
    auto in = ctx.open(s.stage, name);
    std::stringstream ss;
    ss << in.rdbuf();
    auto part = parse_report(ss.str());
    all.params.merge(part.params);
    all.seeds.merge(part.seeds);
    all.constants.merge(part.constants);
    all.censoring.merge(part.censoring);
    for (auto& t : part.tails) all.tails.push_back(std::move(t));
    for (auto& t : part.invariants) {
      auto it = std::find_if(all.invariants.begin(), all.invariants.end(),
                             [&](const InvariantRow& x) { return x.name == t.name; });
      if (it != all.invariants.end())
        *it = std::move(t);
      else
        all.invariants.push_back(std::move(t));
    }
    for (auto& t : part.traps) all.traps.push_back(std::move(t));
    for (auto& t : part.mixing) all.mixing.push_back(std::move(t));
  }
  const auto text = serialize_report(all);
  if (serialize_report(parse_report(text)) != text) throw ReportError("report does not round-trip");
  ctx.write("report.json", [&](std::ostream& os) { os << text; });
  ctx.commit("report");
  std::cout << "report.json: " << all.invariants.size() << " invariant rows, " << all.tails.size() << " tail tables, "
            << all.traps.size() << " trap rows, " << all.mixing.size() << " mixing tables\n";
  return status_of(all.invariants);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Umbrella forest and trapping environment toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> flags;
  app.add_option("--config", config_path, "flat key=value config file");
  auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };
  flag("--seed", "seed", "root seed");
  flag("--dim", "dim", "dimension (2 or 3)");
  flag("--window", "window", "window side");
  flag("--margin", "margin", "lambda search radius, 0 = twice the window side");
  flag("--beta", "beta", "insulation exponent");
  flag("--replicas", "replicas", "walk replicas");
  flag("--horizon", "horizon", "walk horizon");
  flag("--threads", "threads", "worker cap");
  flag("--out", "out", "output directory");
  flag("--max-box", "max_box", "largest cube side for the oracle suite");

  std::string chosen;
  for (const char* name : {"validate", "gen", "forest", "metrics", "prune", "env", "walk", "tails", "mixing", "oracle",
                           "report"}) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    cli::Settings s;
    if (!config_path.empty()) s.parse_file(config_path);
    for (const auto& [k, v] : flags) s.set(k, v);
    const auto cfg = cli::resolve(s);
    fs::create_directories(cfg.out);
    Ctx ctx{cfg, cli::Manifest(cfg.out), cli::hex64(cfg.hash()), {}};
    if (chosen != "validate") {
      const auto v = validate_params(cfg.p);
      if (!v.empty()) throw cli::ConfigError("invalid parameters: " + v.front().rule + ": " + v.front().detail);
      if (chosen != "oracle" && chosen != "report") check_budget(cfg);
    }
    if (chosen == "validate") return run_validate(ctx);
    if (chosen == "gen") return run_gen(ctx);
    if (chosen == "forest") return run_forest(ctx);
    if (chosen == "metrics") return run_metrics(ctx);
    if (chosen == "prune") return run_prune(ctx);
    if (chosen == "env") return run_env(ctx);
    if (chosen == "walk") return run_walk(ctx);
    if (chosen == "tails") return run_tails(ctx);
    if (chosen == "mixing") return run_mixing(ctx);
    if (chosen == "oracle") return run_oracle(ctx);
    return run_report(ctx);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const cli::MissingStage& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const BudgetExceeded& e) {
    std::cerr << "resource budget: " << e.what() << "\n";
    return kBudget;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource budget: out of memory\n";
    return kBudget;
  } catch (const cli::ChecksumMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariant;
  }
}
