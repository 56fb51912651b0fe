#include "spikegrad/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace spikegrad {
namespace {

constexpr std::size_t kMagicLen = 8;

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec, const NetworkWeights& weights,
                     nlohmann::json meta) {
  if (weights.size() != spec.layers.size()) throw CheckpointError("checkpoint: weights do not match architecture");
  if (!meta.is_object()) throw CheckpointError("checkpoint: metadata must be a JSON object");
  meta["architecture"] = render(spec);
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& layer = spec.layers[l];
    if (!layer.trainable()) continue;
    if (weights[l].size() != layer.parameter_count()) {
      throw CheckpointError("checkpoint: layer " + std::to_string(l) + " (" + layer.token() + ") has " +
                            std::to_string(weights[l].size()) + " weights, expected " +
                            std::to_string(layer.parameter_count()));
    }
    layers.push_back({{"layer", layer.token()}, {"count", layer.parameter_count()}});
  }
  meta["layers"] = layers;

  const std::string header = meta.dump();
  std::string out(kCheckpointMagic, kMagicLen);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    if (!spec.layers[l].trainable()) continue;
    for (double v : weights[l].data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("checkpoint: cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw CheckpointError("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<NetworkSpec>& expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("checkpoint: cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (bytes.size() < kMagicLen + 4 || std::memcmp(bytes.data(), kCheckpointMagic, kMagicLen) != 0) {
    throw CheckpointError("checkpoint: bad magic in " + path.string());
  }
  const std::size_t header_len = get_u32(bytes.data() + kMagicLen);
  const std::size_t blob_start = kMagicLen + 4 + header_len;
  if (blob_start > bytes.size()) throw CheckpointError("checkpoint: truncated header in " + path.string());

  Checkpoint ck;
  try {
    ck.header = nlohmann::json::parse(bytes.begin() + kMagicLen + 4, bytes.begin() + static_cast<std::ptrdiff_t>(blob_start));
  } catch (const nlohmann::json::exception& ex) {
    throw CheckpointError(std::string("checkpoint: corrupt header: ") + ex.what());
  }
  if (!ck.header.is_object() || !ck.header.contains("architecture") || !ck.header["architecture"].is_string() ||
      !ck.header.contains("layers") || !ck.header["layers"].is_array()) {
    throw CheckpointError("checkpoint: corrupt header: missing architecture or layers");
  }

  NetworkSpec spec;
  try {
    spec = parse_architecture(ck.header["architecture"].get<std::string>());
  } catch (const std::exception& ex) {
    throw CheckpointError(std::string("checkpoint: corrupt header: ") + ex.what());
  }
  if (expected && render(*expected) != render(spec)) {
    throw CheckpointError("checkpoint: architecture mismatch: file has '" + render(spec) + "', expected '" +
                          render(*expected) + "'");
  }

  const auto& layers = ck.header["layers"];
  std::size_t entry = 0;
  std::size_t offset = blob_start;
  ck.weights.resize(spec.layers.size());
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& layer = spec.layers[l];
    if (!layer.trainable()) continue;
    const std::string name = "layer " + std::to_string(l) + " (" + layer.token() + ")";
    if (entry >= layers.size()) throw CheckpointError("checkpoint: header lists no blob for " + name);
    const auto& e = layers[entry++];
    if (!e.is_object() || !e.contains("count") || !e["count"].is_number_unsigned() ||
        e["count"].get<std::size_t>() != layer.parameter_count()) {
      throw CheckpointError("checkpoint: size mismatch for " + name);
    }
    const std::size_t n = layer.parameter_count();
    if (bytes.size() - offset < 4 * n) {
      throw CheckpointError("checkpoint: truncated blob for " + name + ": need " + std::to_string(4 * n) +
                            " bytes, " + std::to_string(bytes.size() - offset) + " left");
    }
    Tensor w(layer.weight_shape());
    auto d = w.data();
    for (std::size_t i = 0; i < n; ++i, offset += 4) {
      d[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes.data() + offset)));
    }
    ck.weights[l] = std::move(w);
  }
  if (entry != layers.size()) throw CheckpointError("checkpoint: header lists more layers than the architecture");
  if (offset != bytes.size()) throw CheckpointError("checkpoint: " + std::to_string(bytes.size() - offset) + " trailing bytes");
  return ck;
}

}  // namespace spikegrad
