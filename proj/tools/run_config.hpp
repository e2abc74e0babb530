#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "umbrella/field.hpp"

namespace cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value settings; later assignments win.
class Settings {
 public:
  void parse_file(const std::filesystem::path& path);
  void parse_text(const std::string& text, const std::string& origin);
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  const std::map<std::string, std::string>& all() const { return kv_; }

  std::string str(const std::string& key, const std::string& fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  double real(const std::string& key, double fallback) const;

 private:
  std::map<std::string, std::string> kv_;
};

struct RunConfig {
  umbrella::ModelParams p;
  std::uint64_t seed = 1;
  std::int64_t side = 48;
  std::int64_t margin = 0;  // lambda search radius, 0 = twice the side
  std::uint64_t replicas = 500;
  std::int64_t horizon = 10000;
  int threads = 1;
  std::filesystem::path out = "run";
  std::int64_t max_box = 9;
  std::uint64_t site_budget = std::uint64_t{1} << 27;
  std::uint64_t field_dump_budget = std::uint64_t{1} << 22;
  std::uint64_t tail_replicas = 20;
  std::int64_t tail_side = 0;  // 0 = side
  std::uint64_t mixing_replicas = 500;
  std::uint64_t omega_replicas = 0;  // environment mixing table, 0 skips it
  std::int64_t mixing_radius = 0;  // 0 = twice the grid extent

  umbrella::Box window() const { return umbrella::Box::cube(p.d, 0, side - 1); }
  std::int64_t radius() const { return margin > 0 ? margin : 2 * side; }
  // canonical key=value listing of every resolved setting
  std::string canonical() const;
  std::uint64_t hash() const;
};

RunConfig resolve(const Settings& s);

}  // namespace cli
