#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace cli {

struct MissingStage : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ChecksumMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Artifact {
  std::string name;
  std::string checksum;  // fnv1a-64 of the bytes, hex
  std::uint64_t bytes = 0;
};

struct StageRecord {
  std::string stage;
  int version = 1;
  std::string config_hash;
  std::vector<Artifact> artifacts;
};

std::string file_checksum(const std::filesystem::path& p);
std::string hex64(std::uint64_t v);

// manifest.json in the output directory, one record per stage.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  // replaces any earlier record of the same stage
  void record(const std::string& stage, int version, const std::string& config_hash,
              const std::vector<std::string>& files);
  void save() const;
  bool has(const std::string& stage) const;
  // record of `stage` written under the same config, else MissingStage naming the command to run
  const StageRecord& require(const std::string& stage, const std::string& config_hash) const;
  // path of an artifact after checking its checksum
  std::filesystem::path verified(const std::string& stage, const std::string& name) const;
  const std::vector<StageRecord>& stages() const { return stages_; }

 private:
  std::filesystem::path dir_;
  std::vector<StageRecord> stages_;
};

}  // namespace cli
