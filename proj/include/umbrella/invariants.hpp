#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "umbrella/pipeline.hpp"

namespace umbrella {

struct InvariantCount {
  std::string name;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::string witness;  // first violating site
};

struct InvariantInput {
  const ModelParams* p = nullptr;
  const std::vector<Tube>* tubes = nullptr;
  const HInsField* H1 = nullptr;
  const HInsField* H2 = nullptr;
  const Insulation* I1 = nullptr;
  const Insulation* I2 = nullptr;
  const PatchedEnv* env = nullptr;  // null skips the environment checks
  double c31 = 0;
};

// u at a tube member when a nearest non-member is certainly outside the untruncated tube
std::optional<std::int64_t> settled_u(const Tube& t, std::size_t k);

// The exact invariant suite on one instance; one row per property.
std::vector<InvariantCount> check_invariants(const InvariantInput& in);
std::vector<InvariantCount> check_invariants(const Pipeline& pl);

}  // namespace umbrella
