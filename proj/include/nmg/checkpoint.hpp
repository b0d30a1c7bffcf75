#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmg/fno.hpp"

namespace nmg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Trained smoothers of one neural hierarchy plus provenance metadata.
struct Checkpoint {
  struct Level {
    int level = 1;  // 1-based grid level the smoother runs on
    FnoConfig config;
    FnoParams params;
  };
  std::vector<Level> levels;
  std::uint64_t problem_hash = 0;
  std::string problem;  // canonical ProblemSpec text
  int hierarchy_levels = 0;
  std::uint64_t seed = 0;
  nlohmann::json extra = nlohmann::json::object();
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class HashCheck { strict, warn, ignore };

nlohmann::json to_json(const FnoConfig& cfg);
FnoConfig fno_config_from_json(const nlohmann::json& j);

/// Binary layout (all integers little-endian):
///   "NMGCKPT\0" | u32 version | u32 tensor count
///   per tensor: u32 name length | name | u32 rank | u64 dims[rank] | f64 data
///   u64 metadata length | metadata JSON | "NMGEND\0\0"
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);

/// Throws CheckpointError: "corrupt checkpoint: ..." for malformed or
/// truncated data, "unsupported checkpoint version ..." for other versions,
/// and on a problem-hash mismatch under HashCheck::strict. Under
/// HashCheck::warn the mismatch is reported to `warn` (if given).
Checkpoint load_checkpoint(const std::string& path, std::optional<std::uint64_t> expected_hash = std::nullopt,
                           HashCheck mode = HashCheck::strict, std::ostream* warn = nullptr);
Checkpoint read_checkpoint(std::istream& is, std::optional<std::uint64_t> expected_hash = std::nullopt,
                           HashCheck mode = HashCheck::strict, std::ostream* warn = nullptr);

}  // namespace nmg
