#include "vistrip/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "vistrip/vstf.hpp"

namespace vistrip::model {

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

template <class U>
void put(std::ostream& os, U v) {
  std::array<char, sizeof(U)> b{};
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
  os.write(b.data(), b.size());
}

template <class U>
U get(std::istream& is) {
  std::array<unsigned char, sizeof(U)> b{};
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!is) throw FormatError("checkpoint: truncated header");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return static_cast<U>(v);
}

std::size_t entry_bytes(const std::string& name, const Shape& shape) {
  return 2 + name.size() + 8 + 1 + 8 * shape.size();
}

struct Header {
  ModelConfig config;
  std::vector<CheckpointEntry> entries;
};

Header read_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "VSCK", 4) != 0) throw FormatError("checkpoint: bad magic");
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const auto cfg_len = get<std::uint32_t>(is);
  std::string cfg(cfg_len, '\0');
  is.read(cfg.data(), cfg_len);
  if (!is) throw FormatError("checkpoint: truncated config block");
  Header h;
  h.config = deserialize_model_config(cfg);
  const auto count = get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    const auto len = get<std::uint16_t>(is);
    e.name.resize(len);
    is.read(e.name.data(), len);
    e.offset = get<std::uint64_t>(is);
    const auto rank = get<std::uint8_t>(is);
    e.shape.resize(rank);
    for (auto& x : e.shape) x = static_cast<std::size_t>(get<std::uint64_t>(is));
    h.entries.push_back(std::move(e));
  }
  return h;
}

}  // namespace

std::string serialize_model_config(const ModelConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "stack = " << c.num_stsa_blocks << '\n'
     << "channels = " << c.base_channels << '\n'
     << "heads = " << c.heads << '\n'
     << "frames = " << c.frame_window << '\n'
     << "global_residual = " << (c.global_residual ? 1 : 0) << '\n'
     << "in_channels = " << c.in_channels << '\n'
     << "kernel = " << c.kernel << '\n'
     << "leaky_slope = " << c.leaky_slope << '\n'
     << "variant = " << to_string(c.variant) << '\n'
     << "direction = " << attn::to_string(c.directions) << '\n';
  const auto& s = c.encoder_scales;
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << "scale" << i << " = " << s[i].stride << ' ' << s[i].channels << '\n';
  }
  return os.str();
}

ModelConfig deserialize_model_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw FormatError("checkpoint config missing '" + k + "'");
    return it->second;
  };
  ModelConfig c;
  c.num_stsa_blocks = std::stoul(need("stack"));
  c.base_channels = std::stoul(need("channels"));
  c.heads = std::stoul(need("heads"));
  c.frame_window = std::stoul(need("frames"));
  c.global_residual = need("global_residual") == "1";
  c.in_channels = std::stoul(need("in_channels"));
  c.kernel = std::stoul(need("kernel"));
  c.leaky_slope = std::stod(need("leaky_slope"));
  c.variant = parse_block_variant(need("variant"));
  c.directions = attn::parse_directions(need("direction"));
  for (std::size_t i = 0; kv.count("scale" + std::to_string(i)); ++i) {
    std::istringstream ss(kv["scale" + std::to_string(i)]);
    EncoderScale e;
    ss >> e.stride >> e.channels;
    c.encoder_scales.push_back(e);
  }
  c.validate();
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const ModelWeights& w) {
  const std::string cfg = serialize_model_config(config);
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  for_each_param(w, "", [&](const std::string& name, const Tensor& t) { tensors.emplace_back(name, &t); });

  std::uint64_t offset = 4 + 4 + 4 + cfg.size() + 4;
  for (const auto& [name, t] : tensors) offset += entry_bytes(name, t->shape());

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp + " for writing");
    os.write("VSCK", 4);
    put<std::uint32_t>(os, kCheckpointVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.size()));
    os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
      put<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      put<std::uint64_t>(os, offset);
      put<std::uint8_t>(os, static_cast<std::uint8_t>(t->rank()));
      for (std::size_t e : t->shape()) put<std::uint64_t>(os, e);
      offset += vstf_encoded_size(t->shape());
    }
    for (const auto& [name, t] : tensors) write_vstf(os, *t);
    if (!os) throw Error("checkpoint write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<CheckpointEntry> read_checkpoint_index(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  return read_header(is).entries;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  Header h = read_header(is);

  Checkpoint ck;
  ck.config = h.config;
  ck.weights = init_weights(h.config, 0);
  std::map<std::string, const CheckpointEntry*> by_name;
  for (const auto& e : h.entries) by_name[e.name] = &e;

  std::size_t loaded = 0;
  for_each_param(ck.weights, "", [&](const std::string& name, Tensor& t) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("checkpoint missing tensor '" + name + "'");
    is.seekg(static_cast<std::streamoff>(it->second->offset));
    Tensor v = read_vstf(is);
    if (v.shape() != t.shape() || v.shape() != it->second->shape) {
      throw FormatError("checkpoint tensor '" + name + "' has shape " + vistrip::to_string(v.shape()) + ", expected " +
                        vistrip::to_string(t.shape()));
    }
    t = std::move(v);
    ++loaded;
  });
  if (loaded != h.entries.size()) throw FormatError("checkpoint holds tensors the model does not use");
  return ck;
}

}  // namespace vistrip::model
