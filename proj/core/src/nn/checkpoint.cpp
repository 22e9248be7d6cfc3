#include "gdmopt/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "gdmopt/error.hpp"
#include "gdmopt/io.hpp"

namespace gdmopt::nn {

namespace {

using nlohmann::json;

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

std::uint64_t get_u64_le(std::string_view in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

json describe(const NamedNetwork& net) {
  json layers = json::array();
  for (const Layer& l : net.params.layers()) {
    layers.push_back({{"in", l.in_dim()}, {"out", l.out_dim()}, {"activation", activation_name(l.activation)}});
  }
  return {{"name", net.name}, {"layers", layers}};
}

ParamSet shape_from(const json& desc) {
  std::vector<Layer> layers;
  for (const json& jl : desc.at("layers")) {
    const auto in = jl.at("in").get<Eigen::Index>();
    const auto out = jl.at("out").get<Eigen::Index>();
    if (in <= 0 || out <= 0) throw Error(ErrorCode::kIntegrity, "checkpoint layer has non-positive dims");
    const std::string act_name = jl.at("activation").get<std::string>();
    const auto act = parse_activation(act_name);
    if (!act) throw Error(ErrorCode::kIntegrity, "checkpoint names unknown activation '" + act_name + "'");
    layers.push_back(Layer{Mat::Zero(out, in), Vec::Zero(out), *act});
  }
  return ParamSet(std::move(layers));
}

}  // namespace

const ParamSet& Checkpoint::network(std::string_view name) const {
  for (const NamedNetwork& n : networks) {
    if (n.name == name) return n.params;
  }
  throw Error(ErrorCode::kIntegrity, "checkpoint has no network named '" + std::string(name) + "'");
}

bool Checkpoint::has_network(std::string_view name) const {
  for (const NamedNetwork& n : networks) {
    if (n.name == name) return true;
  }
  return false;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  json header;
  header["schema_version"] = kCheckpointSchemaVersion;
  header["seed"] = ckpt.seed;
  header["metadata"] = ckpt.metadata;
  header["networks"] = json::array();
  std::uint64_t count = 0;
  for (const NamedNetwork& n : ckpt.networks) {
    header["networks"].push_back(describe(n));
    count += n.params.parameter_count();
  }

  std::string out = header.dump();
  out.push_back('\n');
  put_u64_le(out, count);
  out.reserve(out.size() + count * 8);
  for (const NamedNetwork& n : ckpt.networks) {
    for (double v : n.params.flatten()) put_u64_le(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string_view::npos) throw Error(ErrorCode::kIntegrity, "checkpoint header is not terminated");

  json header;
  try {
    header = json::parse(bytes.substr(0, newline));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIntegrity, std::string("checkpoint header is not valid JSON: ") + e.what());
  }

  const int version = header.value("schema_version", -1);
  if (version != kCheckpointSchemaVersion) {
    throw Error(ErrorCode::kSchemaVersion,
                "checkpoint schema version " + std::to_string(version) + " is not supported by this build (expects " +
                    std::to_string(kCheckpointSchemaVersion) +
                    "); no migration is available, so retrain or convert it with the release that wrote it");
  }

  Checkpoint ckpt;
  try {
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.metadata = header.value("metadata", json::object());
    for (const json& desc : header.at("networks")) {
      ckpt.networks.push_back(NamedNetwork{desc.at("name").get<std::string>(), shape_from(desc)});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIntegrity, std::string("malformed checkpoint header: ") + e.what());
  }

  std::uint64_t expected = 0;
  for (const NamedNetwork& n : ckpt.networks) expected += n.params.parameter_count();

  std::size_t pos = newline + 1;
  if (bytes.size() < pos + 8) throw Error(ErrorCode::kIntegrity, "checkpoint payload length prefix is missing");
  const std::uint64_t count = get_u64_le(bytes, pos);
  pos += 8;
  if (count != expected) {
    throw Error(ErrorCode::kIntegrity, "payload length prefix says " + std::to_string(count) +
                                           " values but the header describes " + std::to_string(expected));
  }
  if ((bytes.size() - pos) != count * 8) {
    throw Error(ErrorCode::kIntegrity, "payload holds " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                                           std::to_string(count * 8));
  }

  for (NamedNetwork& n : ckpt.networks) {
    std::vector<double> values(n.params.parameter_count());
    for (double& v : values) {
      v = std::bit_cast<double>(get_u64_le(bytes, pos));
      pos += 8;
    }
    n.params.assign(values);
    if (!n.params.all_finite()) throw Error(ErrorCode::kIntegrity, "network '" + n.name + "' has non-finite values");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace gdmopt::nn
