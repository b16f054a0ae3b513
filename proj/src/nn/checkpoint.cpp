#include "lesionrl/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "lesionrl/error.hpp"

namespace lesionrl::nn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

constexpr std::array<char, 8> kMagic = {'L', 'R', 'L', 'C', 'K', 'P', 'T', '\0'};

nlohmann::json config_json(const NetworkConfig& cfg) {
  return {{"input_height", cfg.input_height}, {"input_width", cfg.input_width},
          {"input_channels", cfg.input_channels}, {"conv_layers", cfg.conv_layers},
          {"kernel_size", cfg.kernel_size}, {"stride", cfg.stride},
          {"filters", cfg.filters}, {"hidden_units", cfg.hidden_units},
          {"head", to_string(cfg.head)}};
}

NetworkConfig config_from(const nlohmann::json& j) {
  NetworkConfig cfg;
  cfg.input_height = j.at("input_height").get<int>();
  cfg.input_width = j.at("input_width").get<int>();
  cfg.input_channels = j.at("input_channels").get<int>();
  cfg.conv_layers = j.at("conv_layers").get<int>();
  cfg.kernel_size = j.at("kernel_size").get<int>();
  cfg.stride = j.at("stride").get<int>();
  cfg.filters = j.at("filters").get<int>();
  cfg.hidden_units = j.at("hidden_units").get<int>();
  cfg.head = head_from_string(j.at("head").get<std::string>());
  cfg.validate();
  return cfg;
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw IoError("truncated checkpoint " + path.string());
  }
  return v;
}

void write_floats(std::ostream& out, const std::vector<float>& v) {
  write_pod<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<float> read_floats(std::istream& in, const std::filesystem::path& path,
                               std::size_t expected) {
  const auto n = read_pod<std::uint64_t>(in, path);
  if (n != expected) throw_dimension_mismatch("checkpoint tensor size", expected, n);
  std::vector<float> v(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(float)))) {
    throw IoError("truncated checkpoint " + path.string());
  }
  return v;
}

}  // namespace

std::string config_to_json(const NetworkConfig& cfg) { return config_json(cfg).dump(); }

NetworkConfig config_from_json(const std::string& text) {
  return config_from(nlohmann::json::parse(text));
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  check_shapes(ckpt.params, ckpt.config);
  nlohmann::json manifest = {{"format", "lesionrl-checkpoint"},
                             {"version", kCheckpointVersion},
                             {"config", config_json(ckpt.config)},
                             {"seed", ckpt.seed},
                             {"parameter_count", ckpt.params.parameter_count()}};
  const std::string text = manifest.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& layer : ckpt.params.layers) {
    write_floats(out, layer.weight);
    write_floats(out, layer.bias);
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw IoError(path.string() + " is not a checkpoint file");
  }
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = read_pod<std::uint32_t>(in, path);
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw IoError("truncated checkpoint " + path.string());

  Checkpoint ckpt;
  try {
    const auto manifest = nlohmann::json::parse(text);
    ckpt.config = config_from(manifest.at("config"));
    ckpt.seed = manifest.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint manifest in " + path.string() + ": " + e.what());
  }
  ckpt.params = zero_parameters<float>(ckpt.config);
  for (auto& layer : ckpt.params.layers) {
    layer.weight = read_floats(in, path, layer.weight.size());
    layer.bias = read_floats(in, path, layer.bias.size());
  }
  return ckpt;
}

}  // namespace lesionrl::nn
