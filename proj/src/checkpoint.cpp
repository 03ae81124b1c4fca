#include "styleaug/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace styleaug::nn {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw CheckpointError("truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

std::string join_shape(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out;
}

Shape parse_shape(const std::string& text) {
  Shape s;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) s.push_back(std::stoi(part));
  return s;
}

std::map<std::string, std::string> parse_fields(std::istringstream& line) {
  std::map<std::string, std::string> fields;
  std::string tok;
  while (line >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw CheckpointError("malformed manifest field '" + tok + "'");
    fields[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return fields;
}

const std::string& field(const std::map<std::string, std::string>& f, const std::string& key) {
  auto it = f.find(key);
  if (it == f.end()) throw CheckpointError("manifest record missing '" + key + "'");
  return it->second;
}

std::string manifest_of(const Checkpoint& ckpt) {
  std::ostringstream m;
  for (const auto& [name, net] : ckpt.networks) {
    if (name.empty() || name.find_first_of(" \n") != std::string::npos)
      throw CheckpointError("network names must be non-empty without whitespace");
    m << "network " << name << " input=" << join_shape(net.input_shape) << " layers=" << net.layers.size()
      << " taps=";
    if (net.tap_points.empty()) m << '-';
    for (std::size_t i = 0; i < net.tap_points.size(); ++i) m << (i ? "," : "") << net.tap_points[i];
    m << '\n';
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      const LayerSpec& s = net.layers[i];
      m << "layer " << to_string(s.kind) << " in=" << s.in_channels << " out=" << s.out_channels << " k=" << s.kernel
        << " stride=" << s.stride << " pad=" << s.padding << " padmode=" << to_string(s.pad_mode) << " params=";
      if (net.params[i].empty()) m << '-';
      for (std::size_t j = 0; j < net.params[i].size(); ++j) m << (j ? "," : "") << join_shape(net.params[i][j].shape());
      m << '\n';
    }
  }
  for (const auto& [key, value] : ckpt.metadata) {
    if (key.find_first_of(" \n") != std::string::npos || value.find('\n') != std::string::npos)
      throw CheckpointError("metadata keys must not contain whitespace");
    m << "meta " << key << ' ' << value << '\n';
  }
  return m.str();
}

}  // namespace

const Network& Checkpoint::network(const std::string& name) const {
  for (const auto& [n, net] : networks)
    if (n == name) return net;
  throw CheckpointError("checkpoint has no network named '" + name + "'");
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const std::string manifest = manifest_of(ckpt);
  std::string out(Checkpoint::kMagic, 8);
  put_u32(out, Checkpoint::kVersion);
  put_u32(out, static_cast<std::uint32_t>(manifest.size()));
  out += manifest;
  for (const auto& [name, net] : ckpt.networks)
    for (const auto& layer : net.params)
      for (const auto& t : layer)
        for (float v : t.storage()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || bytes.compare(0, 8, Checkpoint::kMagic) != 0) throw CheckpointError("not a checkpoint file");
  std::size_t pos = 8;
  const std::uint32_t version = get_u32(bytes, pos);
  if (version != Checkpoint::kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t manifest_len = get_u32(bytes, pos);
  if (pos + manifest_len > bytes.size()) throw CheckpointError("truncated manifest");
  std::istringstream manifest(bytes.substr(pos, manifest_len));
  pos += manifest_len;

  Checkpoint ckpt;
  Network* current = nullptr;
  std::size_t expected_layers = 0;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string record;
    ls >> record;
    if (record == "network") {
      if (current && current->layers.size() != expected_layers) throw CheckpointError("layer count mismatch");
      std::string name;
      ls >> name;
      auto f = parse_fields(ls);
      ckpt.networks.emplace_back(name, Network(parse_shape(field(f, "input"))));
      current = &ckpt.networks.back().second;
      expected_layers = std::stoul(field(f, "layers"));
      if (const std::string& taps = field(f, "taps"); taps != "-") {
        std::stringstream ts(taps);
        std::string t;
        while (std::getline(ts, t, ',')) current->tap_points.push_back(std::stoi(t));
      }
    } else if (record == "layer") {
      if (!current) throw CheckpointError("layer record before any network record");
      std::string kind;
      ls >> kind;
      auto f = parse_fields(ls);
      LayerSpec s;
      s.kind = layer_kind_from_string(kind);
      s.in_channels = std::stoi(field(f, "in"));
      s.out_channels = std::stoi(field(f, "out"));
      s.kernel = std::stoi(field(f, "k"));
      s.stride = std::stoi(field(f, "stride"));
      s.padding = std::stoi(field(f, "pad"));
      s.pad_mode = pad_mode_from_string(field(f, "padmode"));
      try {
        current->add(s);
      } catch (const ShapeError& e) {
        throw CheckpointError(std::string("inconsistent layer manifest: ") + e.what());
      }
      std::vector<Shape> declared;
      if (const std::string& ps = field(f, "params"); ps != "-") {
        std::stringstream ss(ps);
        std::string one;
        while (std::getline(ss, one, ',')) declared.push_back(parse_shape(one));
      }
      if (declared != param_shapes(s)) throw CheckpointError("parameter shapes disagree with layer hyperparameters");
    } else if (record == "meta") {
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      ckpt.metadata[key] = value;
    } else {
      throw CheckpointError("unknown manifest record '" + record + "'");
    }
  }
  if (current && current->layers.size() != expected_layers) throw CheckpointError("layer count mismatch");

  for (auto& [name, net] : ckpt.networks)
    for (auto& layer : net.params)
      for (auto& t : layer)
        for (float& v : t.storage()) v = std::bit_cast<float>(get_u32(bytes, pos));
  if (pos != bytes.size()) throw CheckpointError("trailing bytes after parameter payload");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace styleaug::nn
