#include "vistrip/augment.hpp"

#include <algorithm>

#include "vistrip/random.hpp"

namespace vistrip::augment {

namespace {

void require_video(const Tensor& v, const char* what) {
  if (v.rank() != 4) throw ShapeError(std::string(what) + ": expected [T,H,W,C], got " + vistrip::to_string(v.shape()));
}

}  // namespace

Tensor crop(const Tensor& video, std::size_t y0, std::size_t x0, std::size_t height, std::size_t width) {
  require_video(video, "crop");
  const std::size_t T = video.extent(0), H = video.extent(1), W = video.extent(2), C = video.extent(3);
  if (height == 0 || width == 0 || y0 + height > H || x0 + width > W)
    throw ShapeError("crop " + std::to_string(height) + "x" + std::to_string(width) + " at (" + std::to_string(y0) +
                     "," + std::to_string(x0) + ") does not fit frame " + std::to_string(H) + "x" + std::to_string(W));
  Tensor out({T, height, width, C});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t y = 0; y < height; ++y)
      std::copy_n(video.raw() + ((t * H + y0 + y) * W + x0) * C, width * C, out.raw() + (t * height + y) * width * C);
  return out;
}

Tensor flip_horizontal(const Tensor& video) {
  require_video(video, "flip_horizontal");
  const std::size_t T = video.extent(0), H = video.extent(1), W = video.extent(2), C = video.extent(3);
  Tensor out(video.shape());
  for (std::size_t r = 0; r < T * H; ++r)
    for (std::size_t x = 0; x < W; ++x)
      std::copy_n(video.raw() + (r * W + x) * C, C, out.raw() + (r * W + (W - 1 - x)) * C);
  return out;
}

Tensor rotate90(const Tensor& video, unsigned quarter_turns) {
  require_video(video, "rotate90");
  Tensor cur = video;
  for (unsigned k = 0; k < quarter_turns % 4; ++k) {
    const std::size_t T = cur.extent(0), H = cur.extent(1), W = cur.extent(2), C = cur.extent(3);
    // Counter-clockwise: out[y][x] = in[x][W-1-y], out extents W x H.
    Tensor out({T, W, H, C});
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t y = 0; y < W; ++y)
        for (std::size_t x = 0; x < H; ++x)
          std::copy_n(cur.raw() + ((t * H + x) * W + (W - 1 - y)) * C, C, out.raw() + ((t * W + y) * H + x) * C);
    cur = std::move(out);
  }
  return cur;
}

Tensor apply(const Tensor& video, const SpatialTransform& tf) {
  Tensor out = crop(video, tf.y0, tf.x0, tf.height, tf.width);
  if (tf.flip) out = flip_horizontal(out);
  return rotate90(out, tf.quarter_turns);
}

SpatialTransform random_transform(std::size_t height, std::size_t width, std::size_t crop_h, std::size_t crop_w,
                                  std::uint64_t seed) {
  if (crop_h == 0 || crop_w == 0 || crop_h > height || crop_w > width)
    throw ShapeError("crop " + std::to_string(crop_h) + "x" + std::to_string(crop_w) + " larger than frame " +
                     std::to_string(height) + "x" + std::to_string(width));
  Rng rng(Rng::mix(seed, 0x61756720));
  SpatialTransform tf;
  tf.height = crop_h;
  tf.width = crop_w;
  tf.y0 = rng.below(height - crop_h + 1);
  tf.x0 = rng.below(width - crop_w + 1);
  tf.flip = rng.coin();
  // Non-square crops only take half turns so the output extents stay fixed.
  tf.quarter_turns = static_cast<unsigned>(rng.below(4));
  if (crop_h != crop_w) tf.quarter_turns &= 2u;
  return tf;
}

Pair augment_pair(const Pair& pair, std::size_t crop_h, std::size_t crop_w, std::uint64_t seed) {
  require_video(pair.clean, "augment_pair");
  if (pair.clean.shape() != pair.degraded.shape())
    throw ShapeError("augment_pair: clean " + vistrip::to_string(pair.clean.shape()) + " vs degraded " +
                     vistrip::to_string(pair.degraded.shape()));
  const auto tf = random_transform(pair.clean.extent(1), pair.clean.extent(2), crop_h, crop_w, seed);
  return {apply(pair.clean, tf), apply(pair.degraded, tf)};
}

}  // namespace vistrip::augment
