#include "manifest.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "umbrella/rng.hpp"

namespace cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::string file_checksum(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ChecksumMismatch("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return hex64(umbrella::fnv1a(ss.str()));
}

Manifest::Manifest(fs::path dir) : dir_(std::move(dir)) {
  const auto path = dir_ / "manifest.json";
  if (!fs::exists(path)) return;
  std::ifstream in(path);
  const auto j = json::parse(in);
  for (const auto& s : j.at("stages")) {
    StageRecord r{s.at("stage"), s.at("version"), s.at("config_hash"), {}};
    for (const auto& a : s.at("artifacts")) r.artifacts.push_back({a.at("name"), a.at("checksum"), a.at("bytes")});
    stages_.push_back(std::move(r));
  }
}

void Manifest::record(const std::string& stage, int version, const std::string& config_hash,
                      const std::vector<std::string>& files) {
  StageRecord r{stage, version, config_hash, {}};
  for (const auto& f : files) r.artifacts.push_back({f, file_checksum(dir_ / f), fs::file_size(dir_ / f)});
  auto it = std::find_if(stages_.begin(), stages_.end(), [&](const StageRecord& s) { return s.stage == stage; });
  if (it != stages_.end())
    *it = std::move(r);
  else
    stages_.push_back(std::move(r));
}

void Manifest::save() const {
  json j;
  j["stages"] = json::array();
  for (const auto& s : stages_) {
    json arts = json::array();
    for (const auto& a : s.artifacts) arts.push_back({{"name", a.name}, {"checksum", a.checksum}, {"bytes", a.bytes}});
    j["stages"].push_back({{"stage", s.stage}, {"version", s.version}, {"config_hash", s.config_hash}, {"artifacts", arts}});
  }
  std::ofstream out(dir_ / "manifest.json");
  out << j.dump(2) << "\n";
}

bool Manifest::has(const std::string& stage) const {
  return std::any_of(stages_.begin(), stages_.end(), [&](const StageRecord& s) { return s.stage == stage; });
}

const StageRecord& Manifest::require(const std::string& stage, const std::string& config_hash) const {
  for (const auto& s : stages_) {
    if (s.stage != stage) continue;
    if (s.config_hash != config_hash)
      throw MissingStage("stage '" + stage + "' was run with another config; rerun `" + stage + "` first");
    return s;
  }
  throw MissingStage("missing prior stage; run `" + stage + "` first");
}

fs::path Manifest::verified(const std::string& stage, const std::string& name) const {
  for (const auto& s : stages_) {
    if (s.stage != stage) continue;
    for (const auto& a : s.artifacts) {
      if (a.name != name) continue;
      const auto path = dir_ / name;
      if (!fs::exists(path)) throw MissingStage(name + " is gone; rerun `" + stage + "`");
      if (file_checksum(path) != a.checksum) throw ChecksumMismatch("checksum mismatch on " + path.string());
      return path;
    }
  }
  throw MissingStage(name + " not recorded; run `" + stage + "` first");
}

}  // namespace cli
