#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "styleaug/nn/network.hpp"

namespace styleaug::nn {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Container layout:
///   8 bytes   magic "SAUGCKPT"
///   u32 LE    format version
///   u32 LE    manifest length in bytes
///   manifest  text, one record per line:
///               network <name> input=<CxHxW> layers=<n> taps=<i,j,...|->
///               layer <kind> in=.. out=.. k=.. stride=.. pad=.. padmode=.. params=<shape,shape|->
///               meta <key> <value>
///   payload   float32 LE parameter buffers, in manifest order (weight then bias)
struct Checkpoint {
  static constexpr char kMagic[9] = "SAUGCKPT";
  static constexpr std::uint32_t kVersion = 1;

  std::vector<std::pair<std::string, Network>> networks;
  std::map<std::string, std::string> metadata;

  const Network& network(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// In-memory encode/decode of the same byte layout.
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

}  // namespace styleaug::nn
