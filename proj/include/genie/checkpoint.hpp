#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "genie/denoiser.hpp"
#include "genie/errors.hpp"
#include "genie/schedule.hpp"

namespace genie {

// Versioned checkpoint container:
//   magic "GNIECKP1" | u32 version | u64 header_len | header JSON | f64 payload (LE)
// The header carries the schedule parameters, the dims, and a manifest of
// tensor shapes/offsets; the payload is the raw little-endian parameter data.
inline constexpr char kCheckpointMagic[8] = {'G', 'N', 'I', 'E', 'C', 'K', 'P', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

inline std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(in[pos++])) << (8 * i);
  return v;
}
inline std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(in[pos++])) << (8 * i);
  return v;
}
inline double get_f64(const std::string& in, std::size_t& pos) {
  return std::bit_cast<double>(get_u64(in, pos));
}

}  // namespace detail

inline void write_binary_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ConfigError("write failed: " + path);
}

inline std::string read_binary_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return bytes;
}

inline std::string encode_checkpoint(const Denoiser& d, const NoiseSchedule& sched) {
  nlohmann::json header;
  header["schedule"] = {{"T", sched.T}, {"beta_min", sched.beta_min}, {"beta_max", sched.beta_max}};
  header["dims"] = {{"data_dim", d.data_dim},
                    {"n_classes", d.n_classes},
                    {"time_embed_dim", d.time_embed_dim},
                    {"class_embed_dim", d.class_embed_dim}};
  header["guidance"] = "eps = (1+w) cond - w uncond";

  nlohmann::json manifest = nlohmann::json::array();
  std::vector<const std::vector<double>*> tensors;
  std::uint64_t offset = 0;
  const auto add = [&](const std::string& name, std::size_t rows, std::size_t cols,
                       const std::vector<double>& data) {
    manifest.push_back({{"name", name}, {"rows", rows}, {"cols", cols}, {"offset", offset}});
    tensors.push_back(&data);
    offset += data.size();
  };
  for (std::size_t l = 0; l < d.net.layers.size(); ++l) {
    const Layer& layer = d.net.layers[l];
    add("layer" + std::to_string(l) + ".w", layer.w.rows, layer.w.cols, layer.w.data);
    add("layer" + std::to_string(l) + ".b", layer.b.size(), 1, layer.b);
  }
  add("class_embedding", d.class_embedding.rows, d.class_embedding.cols, d.class_embedding.data);
  if (d.superclass_embedding.size() > 0)
    add("superclass_embedding", d.superclass_embedding.rows, d.superclass_embedding.cols,
        d.superclass_embedding.data);
  header["manifest"] = manifest;

  const std::string header_str = header.dump();
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u64(out, header_str.size());
  out += header_str;
  for (const auto* t : tensors)
    for (double v : *t) detail::put_f64(out, v);
  return out;
}

struct LoadedCheckpoint {
  Denoiser denoiser;
  NoiseSchedule schedule;
  nlohmann::json header;
};

inline LoadedCheckpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) + 12 ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw ConfigError("checkpoint: bad magic");
  std::size_t pos = sizeof(kCheckpointMagic);
  const std::uint32_t version = detail::get_u32(bytes, pos);
  if (version != kCheckpointVersion)
    throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
  const std::uint64_t header_len = detail::get_u64(bytes, pos);
  if (pos + header_len > bytes.size()) throw ConfigError("checkpoint: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: bad header JSON: ") + e.what());
  }
  pos += header_len;

  LoadedCheckpoint out;
  out.header = header;
  out.schedule = build_schedule(header["schedule"]["T"].get<std::size_t>(),
                                header["schedule"]["beta_min"].get<double>(),
                                header["schedule"]["beta_max"].get<double>());
  Denoiser& d = out.denoiser;
  d.data_dim = header["dims"]["data_dim"].get<std::size_t>();
  d.n_classes = header["dims"]["n_classes"].get<std::size_t>();
  d.time_embed_dim = header["dims"]["time_embed_dim"].get<std::size_t>();
  d.class_embed_dim = header["dims"]["class_embed_dim"].get<std::size_t>();

  const auto read_tensor = [&](const nlohmann::json& entry) {
    const auto rows = entry["rows"].get<std::size_t>();
    const auto cols = entry["cols"].get<std::size_t>();
    const auto offset = entry["offset"].get<std::uint64_t>();
    Matrix m(rows, cols);
    std::size_t p = pos + offset * 8;
    if (p + m.data.size() * 8 > bytes.size()) throw ConfigError("checkpoint: truncated payload");
    for (auto& v : m.data) v = detail::get_f64(bytes, p);
    return m;
  };

  std::size_t layer_count = 0;
  for (const auto& entry : header["manifest"]) {
    const std::string name = entry["name"].get<std::string>();
    if (name.starts_with("layer") && name.ends_with(".w")) ++layer_count;
  }
  d.net.layers.resize(layer_count);
  for (const auto& entry : header["manifest"]) {
    const std::string name = entry["name"].get<std::string>();
    Matrix m = read_tensor(entry);
    if (name == "class_embedding") {
      d.class_embedding = std::move(m);
    } else if (name == "superclass_embedding") {
      d.superclass_embedding = std::move(m);
    } else if (name.starts_with("layer")) {
      const std::size_t l = std::stoul(name.substr(5));
      if (l >= layer_count) throw ConfigError("checkpoint: bad layer index in manifest");
      if (name.ends_with(".w"))
        d.net.layers[l].w = std::move(m);
      else
        d.net.layers[l].b = std::move(m.data);
    } else {
      throw ConfigError("checkpoint: unknown tensor " + name);
    }
  }
  for (std::size_t l = 0; l < layer_count; ++l)
    d.net.layers[l].act = l + 1 < layer_count ? Activation::silu : Activation::identity;

  if (d.net.input_dim() != d.input_dim() || d.net.output_dim() != d.data_dim)
    throw ConfigError("checkpoint: dims inconsistent with manifest");
  return out;
}

inline void save_checkpoint(const std::string& path, const Denoiser& d,
                            const NoiseSchedule& sched) {
  write_binary_file(path, encode_checkpoint(d, sched));
}

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_binary_file(path));
}

}  // namespace genie
