#include "vistrip/model.hpp"

#include <cmath>

#include "vistrip/ops.hpp"
#include "vistrip/vstf.hpp"

namespace vistrip::model {

const char* to_string(BlockVariant v) { return v == BlockVariant::Stsa ? "stsa" : "joint"; }

BlockVariant parse_block_variant(const std::string& s) {
  if (s == "stsa") return BlockVariant::Stsa;
  if (s == "joint") return BlockVariant::Joint;
  throw ConfigError("unknown variant '" + s + "' (expected stsa or joint)");
}

ModelConfig ModelConfig::with_base(std::size_t base_channels, std::size_t num_blocks, std::size_t heads) {
  ModelConfig c;
  c.base_channels = base_channels;
  c.num_stsa_blocks = num_blocks;
  c.heads = heads;
  c.encoder_scales = {{1, base_channels}, {2, 2 * base_channels}};
  return c;
}

std::size_t ModelConfig::bottleneck_channels() const {
  return encoder_scales.empty() ? 2 * base_channels : encoder_scales.back().channels;
}

std::size_t ModelConfig::total_stride() const {
  if (encoder_scales.empty()) return 2;
  std::size_t s = 1;
  for (const auto& e : encoder_scales) s *= e.stride;
  return s;
}

void ModelConfig::validate() const {
  if (num_stsa_blocks < 1) throw ConfigError("num_stsa_blocks must be >= 1");
  if (base_channels == 0) throw ConfigError("base_channels must be positive");
  if (!encoder_scales.empty() && encoder_scales.size() != 2) {
    throw ConfigError("encoder_scales must list exactly two levels");
  }
  for (const auto& e : encoder_scales) {
    if (e.stride == 0 || e.channels == 0) throw ConfigError("encoder scale stride/channels must be positive");
  }
  if (kernel % 2 == 0) throw ConfigError("kernel must be odd");
  if (frame_window == 0) throw ConfigError("frame_window must be positive");
  const std::size_t c = bottleneck_channels();
  if (heads == 0 || c % 2 != 0 || c % (2 * heads) != 0) {
    throw ConfigError("bottleneck channels (" + std::to_string(c) + ", from channels=" +
                      std::to_string(base_channels) + ") must be even and divisible by 2*heads (heads=" +
                      std::to_string(heads) + ")");
  }
}

namespace {

std::vector<EncoderScale> scales_of(const ModelConfig& c) {
  if (!c.encoder_scales.empty()) return c.encoder_scales;
  return {{1, c.base_channels}, {2, 2 * c.base_channels}};
}

ConvParams init_conv(std::size_t k, std::size_t cin, std::size_t cout, double gain, Rng& rng) {
  const double fan_in = static_cast<double>(k * k * cin);
  return {random_normal({k, k, cin, cout}, rng, gain / std::sqrt(fan_in)), Tensor({cout})};
}

std::size_t conv_count(std::size_t k, std::size_t cin, std::size_t cout) { return k * k * cin * cout + cout; }

std::size_t feb_count(std::size_t k, std::size_t cin, std::size_t cout) {
  return conv_count(k, cin, cout) + 6 * conv_count(3, cout, cout);
}

}  // namespace

FEBParams init_feb(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, Rng& rng) {
  FEBParams p;
  p.conv = init_conv(kernel, in_channels, out_channels, 1.0, rng);
  for (auto& r : p.res) {
    r.conv1 = init_conv(3, out_channels, out_channels, std::sqrt(2.0), rng);
    // Small second conv keeps each residual block near identity at start.
    r.conv2 = init_conv(3, out_channels, out_channels, 0.1, rng);
  }
  return p;
}

ModelWeights init_weights(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const auto scales = scales_of(config);
  Rng rng(seed);
  ModelWeights w;
  w.enc1 = init_feb(config.in_channels, scales[0].channels, config.kernel, rng);
  w.enc2 = init_feb(scales[0].channels, scales[1].channels, config.kernel, rng);
  for (std::size_t i = 0; i < config.num_stsa_blocks; ++i) {
    STSABlockParams b;
    b.intra = attn::init_strip_params(scales[1].channels, config.heads, rng);
    b.inter = attn::init_strip_params(scales[1].channels, config.heads, rng);
    w.blocks.push_back(std::move(b));
  }
  w.dec2 = init_feb(scales[1].channels, scales[0].channels, config.kernel, rng);
  w.dec1 = init_feb(scales[0].channels, scales[0].channels, config.kernel, rng);
  w.proj = init_conv(config.kernel, scales[0].channels, config.in_channels, 0.1, rng);
  for_each_param(w, "", [](const std::string&, Tensor& t) { round_to_f32(t); });
  return w;
}

std::size_t param_count(const ModelConfig& config) {
  config.validate();
  const auto s = scales_of(config);
  const std::size_t k = config.kernel;
  return feb_count(k, config.in_channels, s[0].channels) + feb_count(k, s[0].channels, s[1].channels) +
         config.num_stsa_blocks * 2 * attn::strip_param_count(s[1].channels) +
         feb_count(k, s[1].channels, s[0].channels) + feb_count(k, s[0].channels, s[0].channels) +
         conv_count(k, s[0].channels, config.in_channels);
}

Var feb_forward(Var frames, const FEBVars& p, std::size_t stride, double leaky_slope) {
  Var x = ops::conv2d(frames, p.conv.weight, p.conv.bias, {.stride = stride, .pad = {}});
  for (const auto& r : p.res) {
    Var y = ops::conv2d(x, r.conv1.weight, r.conv1.bias);
    y = ops::leaky_relu(y, leaky_slope);
    y = ops::conv2d(y, r.conv2.weight, r.conv2.bias);
    x = ops::add(x, y);
  }
  return x;
}

Var stsa_forward(Var x, const STSABlockVars& p, BlockVariant variant, attn::Directions dirs) {
  if (variant == BlockVariant::Joint) {
    Var y = attn::joint_strip_attention(x, p.intra, dirs);
    return attn::joint_strip_attention(y, p.inter, dirs);
  }
  Var y = attn::intra_sa_block(x, p.intra, dirs);
  return attn::inter_sa_block(y, p.inter, dirs);
}

Var vistripformer_forward(Var degraded, const ModelConfig& config, const ModelVars& w) {
  config.validate();
  const Shape& s = degraded.shape();
  if (s.size() != 4 || s[3] != config.in_channels) {
    throw ShapeError("model input must be [T,H,W," + std::to_string(config.in_channels) + "], got " +
                     vistrip::to_string(s));
  }
  const std::size_t stride = config.total_stride();
  if (s[1] % stride != 0 || s[2] % stride != 0) {
    throw ConfigError("frame size " + std::to_string(s[1]) + "x" + std::to_string(s[2]) +
                      " must be divisible by the total encoder stride " + std::to_string(stride));
  }
  if (w.blocks.size() != config.num_stsa_blocks) {
    throw ConfigError("weights hold " + std::to_string(w.blocks.size()) + " STSA blocks, config expects " +
                      std::to_string(config.num_stsa_blocks));
  }
  const auto scales = scales_of(config);

  Var e1 = feb_forward(degraded, w.enc1, scales[0].stride, config.leaky_slope);
  Var e2 = feb_forward(e1, w.enc2, scales[1].stride, config.leaky_slope);
  Var z = e2;
  for (const auto& b : w.blocks) z = stsa_forward(z, b, config.variant, config.directions);

  Var d = ops::upsample_nearest(ops::add(z, e2), scales[1].stride);
  d = feb_forward(d, w.dec2, 1, config.leaky_slope);
  d = ops::upsample_nearest(ops::add(d, e1), scales[0].stride);
  d = feb_forward(d, w.dec1, 1, config.leaky_slope);
  Var out = ops::conv2d(d, w.proj.weight, w.proj.bias);
  if (config.global_residual) out = ops::add(out, degraded);
  return out;
}

Tensor restore(const Tensor& degraded, const ModelConfig& config, const ModelWeights& w) {
  Tape tape;
  Var x = tape.constant(degraded);
  ModelVars vars = bind_constant(tape, w);
  return vistripformer_forward(x, config, vars).value();
}

void zero_projection(ModelWeights& w) {
  w.proj.weight.fill(0.0);
  w.proj.bias.fill(0.0);
}

}  // namespace vistrip::model
