#include <benchmark/benchmark.h>

#include "vistrip/footprint.hpp"
#include "vistrip/model.hpp"
#include "vistrip/ops.hpp"
#include "vistrip/random.hpp"
#include "vistrip/strip_attention.hpp"

using namespace vistrip;

namespace {

// Args: frames, frame side, mechanism.
void BM_StripBlock(benchmark::State& state) {
  const auto t = static_cast<std::size_t>(state.range(0));
  const auto s = static_cast<std::size_t>(state.range(1));
  const auto m = static_cast<attn::Mechanism>(state.range(2));
  Rng rng(1);
  const auto p = attn::init_strip_params(32, 8, rng);
  const Tensor x = random_normal({t, s, s, 32}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(attn::apply_block(x, p, {m, attn::Directions::Both}));
  state.SetLabel(attn::to_string(m));
}
BENCHMARK(BM_StripBlock)
    ->ArgsProduct({{4}, {16, 32}, {static_cast<long>(attn::Mechanism::Intra), static_cast<long>(attn::Mechanism::Inter),
                                   static_cast<long>(attn::Mechanism::Joint)}})
    ->Unit(benchmark::kMillisecond);

void BM_FullAttention(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Tensor x = random_normal({4, s, s, 32}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(attn::full_attention_forward(x, 8, nullptr));
}
BENCHMARK(BM_FullAttention)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_StripBlockBackward(benchmark::State& state) {
  Rng rng(3);
  const auto p = attn::init_strip_params(32, 8, rng);
  const Tensor x = random_normal({4, 24, 24, 32}, rng);
  for (auto _ : state) {
    Tape tape;
    const auto v = bind(tape, p);
    const Var y = attn::strip_attention_block(tape.constant(x), v, {attn::Mechanism::Intra, attn::Directions::Both});
    tape.backward(ops::sum(y));
  }
}
BENCHMARK(BM_StripBlockBackward)->Unit(benchmark::kMillisecond);

// Args: output channels, frame side.
void BM_Conv3x3(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto s = static_cast<std::size_t>(state.range(1));
  Rng rng(4);
  const Tensor x = random_normal({4, s, s, c}, rng);
  const Tensor w = random_normal({3, 3, c, c}, rng);
  const Tensor b = random_normal({c}, rng);
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(ops::conv2d(tape.constant(x), tape.constant(w), tape.constant(b)).value());
  }
}
BENCHMARK(BM_Conv3x3)->Args({16, 48})->Args({32, 24})->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
  auto cfg = model::ModelConfig::with_base(16, 2, 8);
  cfg.frame_window = 4;
  const auto w = model::init_weights(cfg, 5);
  Rng rng(6);
  const Tensor x = random_uniform({4, 48, 48, 3}, rng, 0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(model::restore(x, cfg, w));
}
BENCHMARK(BM_ModelForward)->Unit(benchmark::kMillisecond);

void BM_FootprintInstrumented(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(attn::attention_footprint(4, 12, 12));
}
BENCHMARK(BM_FootprintInstrumented)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
