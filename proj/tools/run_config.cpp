#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "umbrella/rng.hpp"

namespace cli {

namespace {
std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value for " + key + ": '" + v + "'");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace

void Settings::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  parse_text(ss.str(), path.string());
}

void Settings::parse_text(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(no) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(no) + ": empty key");
    kv_[key] = trim(line.substr(eq + 1));
  }
}

std::string Settings::str(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}
std::int64_t Settings::integer(const std::string& key, std::int64_t fallback) const {
  return has(key) ? parse_number<std::int64_t>(key, kv_.at(key)) : fallback;
}
std::uint64_t Settings::u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_number<std::uint64_t>(key, kv_.at(key)) : fallback;
}
double Settings::real(const std::string& key, double fallback) const {
  return has(key) ? parse_number<double>(key, kv_.at(key)) : fallback;
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv{
      {"dim", std::to_string(p.d)},
      {"n0", std::to_string(p.n0)},
      {"theta", fmt(p.theta)},
      {"gamma", fmt(p.gamma)},
      {"beta", fmt(p.beta)},
      {"seed", std::to_string(seed)},
      {"window", std::to_string(side)},
      {"margin", std::to_string(radius())},
      {"replicas", std::to_string(replicas)},
      {"horizon", std::to_string(horizon)},
      {"max_box", std::to_string(max_box)},
      {"site_budget", std::to_string(site_budget)},
      {"field_dump_budget", std::to_string(field_dump_budget)},
      {"tail_replicas", std::to_string(tail_replicas)},
      {"tail_window", std::to_string(tail_side > 0 ? tail_side : side)},
      {"mixing_replicas", std::to_string(mixing_replicas)},
      {"mixing_radius", std::to_string(mixing_radius)},
      {"omega_replicas", std::to_string(omega_replicas)},
  };
  std::string out;
  for (auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const { return umbrella::fnv1a(canonical()); }

RunConfig resolve(const Settings& s) {
  static const char* known[] = {"dim",      "n0",          "theta",       "gamma",          "beta",
                                "seed",     "window",      "margin",      "replicas",       "horizon",
                                "threads",  "out",         "max_box",     "site_budget",    "field_dump_budget",
                                "tail_replicas", "tail_window", "mixing_replicas", "mixing_radius",
                                "omega_replicas"};
  for (auto& [k, v] : s.all()) {
    bool ok = false;
    for (auto* n : known) ok = ok || k == n;
    if (!ok) throw ConfigError("unknown config key '" + k + "'");
  }
  RunConfig c;
  const auto d = static_cast<int>(s.integer("dim", 3));
  if (d != 2 && d != 3) throw ConfigError("dim must be 2 or 3");
  c.p = umbrella::ModelParams::preset(d);
  c.p.n0 = static_cast<int>(s.integer("n0", c.p.n0));
  c.p.theta = s.real("theta", c.p.theta);
  c.p.gamma = s.real("gamma", c.p.gamma);
  c.p.beta = s.real("beta", c.p.beta);
  c.seed = s.u64("seed", c.seed);
  c.side = s.integer("window", c.side);
  c.margin = s.integer("margin", c.margin);
  c.replicas = s.u64("replicas", c.replicas);
  c.horizon = s.integer("horizon", c.horizon);
  c.threads = static_cast<int>(s.integer("threads", c.threads));
  c.out = s.str("out", c.out.string());
  c.max_box = s.integer("max_box", c.max_box);
  c.site_budget = s.u64("site_budget", c.site_budget);
  c.field_dump_budget = s.u64("field_dump_budget", c.field_dump_budget);
  c.tail_replicas = s.u64("tail_replicas", c.tail_replicas);
  c.tail_side = s.integer("tail_window", c.tail_side);
  c.mixing_replicas = s.u64("mixing_replicas", c.mixing_replicas);
  c.mixing_radius = s.integer("mixing_radius", c.mixing_radius);
  c.omega_replicas = s.u64("omega_replicas", c.omega_replicas);
  if (c.side < 2) throw ConfigError("window must be at least 2");
  if (c.margin < 0) throw ConfigError("margin must be nonnegative");
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  if (c.replicas < 1) throw ConfigError("replicas must be at least 1");
  if (c.horizon < 2) throw ConfigError("horizon must be at least 2");
  if (c.max_box < 2) throw ConfigError("max_box must be at least 2");
  c.p.seed = c.seed;
  c.p.window = umbrella::cube_window(d, c.side, c.radius());
  return c;
}

}  // namespace cli
