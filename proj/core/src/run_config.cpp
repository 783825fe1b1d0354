#include "vistrip/run_config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <set>
#include <sstream>

namespace vistrip::train {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "task",  "mixed", "stack",    "channels", "heads",  "frames",      "variant", "direction",
      "global_residual", "crop", "source", "batch", "steps", "lr", "lr_final", "lambda", "epsilon",
      "charbonnier", "clip", "seed", "val_every", "val_sequences", "threads"};
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::map<std::string, std::size_t> seen_at;
  std::istringstream is(text);
  std::string line;
  for (std::size_t n = 1; std::getline(is, line); ++n) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(n);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    if (auto it = seen_at.find(key); it != seen_at.end())
      throw ConfigError(where + ": duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
    seen_at[key] = n;
    kv[key] = value;
  }
  return kv;
}

TrainConfig apply_key_values(TrainConfig c, const KeyValues& kv) {
  for (const auto& [k, v] : kv) {
    if (!known_keys().count(k)) throw ConfigError("unknown key '" + k + "'");
  }
  auto get = [&](const char* k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("task")) c.task = synth::parse_degradation(*v);
  if (auto v = get("mixed")) c.mixed_orientation = to_bool("mixed", *v);
  if (auto v = get("stack")) c.model.num_stsa_blocks = to_size("stack", *v);
  if (auto v = get("channels")) {
    c.model.base_channels = to_size("channels", *v);
    c.model.encoder_scales = {{1, c.model.base_channels}, {2, 2 * c.model.base_channels}};
  }
  if (auto v = get("heads")) c.model.heads = to_size("heads", *v);
  if (auto v = get("frames")) c.model.frame_window = to_size("frames", *v);
  if (auto v = get("variant")) c.model.variant = model::parse_block_variant(*v);
  if (auto v = get("direction")) c.model.directions = attn::parse_directions(*v);
  if (auto v = get("global_residual")) c.model.global_residual = to_bool("global_residual", *v);
  if (auto v = get("crop")) c.crop = to_size("crop", *v);
  if (auto v = get("source")) c.source_size = to_size("source", *v);
  if (auto v = get("batch")) c.batch = to_size("batch", *v);
  if (auto v = get("steps")) c.steps = to_size("steps", *v);
  if (auto v = get("lr")) c.lr = to_double("lr", *v);
  if (auto v = get("lr_final")) c.lr_final = to_double("lr_final", *v);
  if (auto v = get("lambda")) c.loss.lambda = to_double("lambda", *v);
  if (auto v = get("epsilon")) c.loss.epsilon = to_double("epsilon", *v);
  if (auto v = get("charbonnier")) {
    if (*v == "frame")
      c.loss.mode = loss::CharbonnierMode::PerFrame;
    else if (*v == "pixel")
      c.loss.mode = loss::CharbonnierMode::PerPixel;
    else
      throw ConfigError("charbonnier: expected frame or pixel, got '" + *v + "'");
  }
  if (auto v = get("clip")) c.grad_clip = to_double("clip", *v);
  if (auto v = get("seed")) c.seed = to_u64("seed", *v);
  if (auto v = get("val_every")) c.val_every = to_size("val_every", *v);
  if (auto v = get("val_sequences")) c.val_sequences = to_size("val_sequences", *v);
  if (auto v = get("threads")) c.threads = to_size("threads", *v);

  const std::size_t bottleneck = c.model.bottleneck_channels();
  if (c.model.heads == 0 || bottleneck % (2 * c.model.heads) != 0)
    throw ConfigError("channels = " + std::to_string(c.model.base_channels) + " and heads = " +
                      std::to_string(c.model.heads) + " are incompatible: bottleneck width " +
                      std::to_string(bottleneck) + " must be divisible by 2*heads");
  c.validate();
  return c;
}

TrainConfig parse_config_text(const std::string& text, const std::string& origin) {
  return apply_key_values(TrainConfig{}, parse_key_values(text, origin));
}

TrainConfig parse_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  return parse_config_text(text, path.string());
}

std::string to_text(const TrainConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "task = " << synth::to_string(c.task) << '\n'
     << "mixed = " << (c.mixed_orientation ? "true" : "false") << '\n'
     << "stack = " << c.model.num_stsa_blocks << '\n'
     << "channels = " << c.model.base_channels << '\n'
     << "heads = " << c.model.heads << '\n'
     << "frames = " << c.model.frame_window << '\n'
     << "variant = " << model::to_string(c.model.variant) << '\n'
     << "direction = " << attn::to_string(c.model.directions) << '\n'
     << "global_residual = " << (c.model.global_residual ? "true" : "false") << '\n'
     << "crop = " << c.crop << '\n'
     << "source = " << c.source_size << '\n'
     << "batch = " << c.batch << '\n'
     << "steps = " << c.steps << '\n'
     << "lr = " << c.lr << '\n'
     << "lr_final = " << c.lr_final << '\n'
     << "lambda = " << c.loss.lambda << '\n'
     << "epsilon = " << c.loss.epsilon << '\n'
     << "charbonnier = " << (c.loss.mode == loss::CharbonnierMode::PerFrame ? "frame" : "pixel") << '\n'
     << "clip = " << c.grad_clip << '\n'
     << "seed = " << c.seed << '\n'
     << "val_every = " << c.val_every << '\n'
     << "val_sequences = " << c.val_sequences << '\n'
     << "threads = " << c.threads << '\n';
  return os.str();
}

}  // namespace vistrip::train
