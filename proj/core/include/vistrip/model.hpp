#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "vistrip/params.hpp"
#include "vistrip/random.hpp"
#include "vistrip/strip_attention.hpp"

namespace vistrip::model {

/// How the bottleneck blocks attend.
enum class BlockVariant {
  Stsa,   ///< Intra-SA followed by Inter-SA
  Joint,  ///< both sub-blocks use joint spatio-temporal strip attention
};

const char* to_string(BlockVariant v);
BlockVariant parse_block_variant(const std::string& s);

struct EncoderScale {
  std::size_t stride = 1;
  std::size_t channels = 16;
};

struct ModelConfig {
  std::size_t num_stsa_blocks = 2;
  std::size_t base_channels = 16;
  std::size_t heads = 8;
  std::size_t frame_window = 4;
  /// Two encoder levels; the decoder mirrors them.
  std::vector<EncoderScale> encoder_scales;
  bool global_residual = true;
  std::size_t in_channels = 3;
  std::size_t kernel = 3;
  double leaky_slope = 0.1;
  BlockVariant variant = BlockVariant::Stsa;
  attn::Directions directions = attn::Directions::Both;

  /// Encoder widths default to (stride 1, C0), (stride 2, 2 C0).
  static ModelConfig with_base(std::size_t base_channels, std::size_t num_blocks, std::size_t heads = 8);

  std::size_t bottleneck_channels() const;
  std::size_t total_stride() const;
  /// Throws ConfigError naming the offending fields.
  void validate() const;
};

template <class T>
struct ConvParamsT {
  T weight;  // [k,k,Cin,Cout]
  T bias;    // [Cout]

  template <class Self, class F>
  static void visit(Self& s, const std::string& prefix, F&& f) {
    f(prefix + "weight", s.weight);
    f(prefix + "bias", s.bias);
  }
  template <class U, class F>
  ConvParamsT<U> map(F&& f) const {
    return {f(weight), f(bias)};
  }
};

/// conv -> leaky -> conv, plus identity.
template <class T>
struct ResBlockParamsT {
  ConvParamsT<T> conv1, conv2;

  template <class Self, class F>
  static void visit(Self& s, const std::string& prefix, F&& f) {
    ConvParamsT<T>::visit(s.conv1, prefix + "conv1.", f);
    ConvParamsT<T>::visit(s.conv2, prefix + "conv2.", f);
  }
  template <class U, class F>
  ResBlockParamsT<U> map(F&& f) const {
    return {conv1.template map<U>(f), conv2.template map<U>(f)};
  }
};

/// Feature embedding block: one conv followed by three residual blocks,
/// shared across frames.
template <class T>
struct FEBParamsT {
  ConvParamsT<T> conv;
  std::array<ResBlockParamsT<T>, 3> res;

  template <class Self, class F>
  static void visit(Self& s, const std::string& prefix, F&& f) {
    ConvParamsT<T>::visit(s.conv, prefix + "conv.", f);
    for (std::size_t i = 0; i < 3; ++i)
      ResBlockParamsT<T>::visit(s.res[i], prefix + "res" + std::to_string(i + 1) + ".", f);
  }
  template <class U, class F>
  FEBParamsT<U> map(F&& f) const {
    return {conv.template map<U>(f),
            {res[0].template map<U>(f), res[1].template map<U>(f), res[2].template map<U>(f)}};
  }
};

template <class T>
struct STSABlockParamsT {
  attn::StripAttentionParamsT<T> intra;
  attn::StripAttentionParamsT<T> inter;

  template <class Self, class F>
  static void visit(Self& s, const std::string& prefix, F&& f) {
    attn::StripAttentionParamsT<T>::visit(s.intra, prefix + "intra.", f);
    attn::StripAttentionParamsT<T>::visit(s.inter, prefix + "inter.", f);
  }
  template <class U, class F>
  STSABlockParamsT<U> map(F&& f) const {
    return {intra.template map<U>(f), inter.template map<U>(f)};
  }
};

template <class T>
struct ModelWeightsT {
  FEBParamsT<T> enc1, enc2;
  std::vector<STSABlockParamsT<T>> blocks;
  FEBParamsT<T> dec2, dec1;
  ConvParamsT<T> proj;

  template <class Self, class F>
  static void visit(Self& s, const std::string& prefix, F&& f) {
    FEBParamsT<T>::visit(s.enc1, prefix + "enc1.", f);
    FEBParamsT<T>::visit(s.enc2, prefix + "enc2.", f);
    for (std::size_t i = 0; i < s.blocks.size(); ++i)
      STSABlockParamsT<T>::visit(s.blocks[i], prefix + "blocks." + std::to_string(i) + ".", f);
    FEBParamsT<T>::visit(s.dec2, prefix + "dec2.", f);
    FEBParamsT<T>::visit(s.dec1, prefix + "dec1.", f);
    ConvParamsT<T>::visit(s.proj, prefix + "proj.", f);
  }
  template <class U, class F>
  ModelWeightsT<U> map(F&& f) const {
    ModelWeightsT<U> out;
    out.enc1 = enc1.template map<U>(f);
    out.enc2 = enc2.template map<U>(f);
    out.blocks.reserve(blocks.size());
    for (const auto& b : blocks) out.blocks.push_back(b.template map<U>(f));
    out.dec2 = dec2.template map<U>(f);
    out.dec1 = dec1.template map<U>(f);
    out.proj = proj.template map<U>(f);
    return out;
  }
};

using ConvParams = ConvParamsT<Tensor>;
using FEBParams = FEBParamsT<Tensor>;
using FEBVars = FEBParamsT<Var>;
using STSABlockParams = STSABlockParamsT<Tensor>;
using STSABlockVars = STSABlockParamsT<Var>;
using ModelWeights = ModelWeightsT<Tensor>;
using ModelVars = ModelWeightsT<Var>;

/// Random initialisation; weights are rounded to f32 so checkpoints are exact.
ModelWeights init_weights(const ModelConfig& config, std::uint64_t seed);
FEBParams init_feb(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, Rng& rng);

/// Learnable scalars implied by the config.
std::size_t param_count(const ModelConfig& config);

/// Applies the shared FEB to every frame of [T,H,W,Cin].
Var feb_forward(Var frames, const FEBVars& p, std::size_t stride, double leaky_slope = 0.1);
/// Intra-SA then Inter-SA (or two joint blocks); shape preserved.
Var stsa_forward(Var x, const STSABlockVars& p, BlockVariant variant = BlockVariant::Stsa,
                 attn::Directions dirs = attn::Directions::Both);

/// Restores a degraded [T,H,W,3] clip. Throws ConfigError when H or W is not
/// divisible by the total encoder stride.
Var vistripformer_forward(Var degraded, const ModelConfig& config, const ModelVars& w);

/// Inference convenience on plain tensors.
Tensor restore(const Tensor& degraded, const ModelConfig& config, const ModelWeights& w);

/// Zeroes the final projection so a global-residual model is the identity map.
void zero_projection(ModelWeights& w);

}  // namespace vistrip::model
