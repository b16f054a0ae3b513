#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "lesionrl/nn/config.hpp"
#include "lesionrl/nn/params.hpp"

namespace lesionrl::nn {

struct Checkpoint {
  NetworkConfig config;
  std::uint64_t seed = 0;
  ParameterStore params;

  bool operator==(const Checkpoint&) const = default;
};

// Binary layout (little-endian):
//   8 bytes  magic "LRLCKPT\0"
//   u32      format version (1)
//   u32      manifest length, then the JSON manifest (config, seed, layer sizes)
//   per layer: u64 weight count, f32[count], u64 bias count, f32[count]
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string config_to_json(const NetworkConfig& cfg);
NetworkConfig config_from_json(const std::string& text);

}  // namespace lesionrl::nn
