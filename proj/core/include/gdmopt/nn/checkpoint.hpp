#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdmopt/nn/mlp.hpp"

namespace gdmopt::nn {

inline constexpr int kCheckpointSchemaVersion = 1;

struct NamedNetwork {
  std::string name;
  ParamSet params;
};

// On-disk layout:
//   <JSON header, one line>\n
//   <u64 little-endian value count>
//   <count x IEEE-754 binary64, little-endian>
// The header records schema_version, seed, free-form metadata, and for each
// network its name, layer dims and activation names. Parameter values follow
// network order, then layer order, weights row-major then bias.
struct Checkpoint {
  std::uint64_t seed = 0;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<NamedNetwork> networks;

  const ParamSet& network(std::string_view name) const;
  bool has_network(std::string_view name) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gdmopt::nn
