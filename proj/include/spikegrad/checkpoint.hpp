#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "spikegrad/network.hpp"

namespace spikegrad {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[] = "SPKM0001";

/// Header fields written by save_checkpoint on top of the caller's metadata:
///   "architecture": rendered architecture string
///   "layers": [{"layer": token, "count": n}, ...] one entry per trainable layer
struct Checkpoint {
  nlohmann::json header;
  NetworkWeights weights;  // one tensor per layer, empty for input/pool

  std::string architecture() const { return header.at("architecture").get<std::string>(); }
};

/// Layout: 8-byte magic, u32 LE header length, UTF-8 JSON header, then the
/// trainable layers' weights in declaration order as f32 LE. Weights are
/// rounded to float on save.
void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec, const NetworkWeights& weights,
                     nlohmann::json meta = nlohmann::json::object());

/// Reads and validates a checkpoint. When `expected` is given, the stored
/// architecture must render identically.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<NetworkSpec>& expected = std::nullopt);

}  // namespace spikegrad
