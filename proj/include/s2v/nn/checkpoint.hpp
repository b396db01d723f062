#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "s2v/nn/param_set.hpp"

namespace s2v::nn {

inline constexpr const char* kCheckpointVersion = "s2v-ckpt-1";

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ParamSet params;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Writes `<path>` (JSON manifest: names, shapes, byte offsets) and the
/// sidecar `<path>.bin` of little-endian doubles in manifest order.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace s2v::nn
