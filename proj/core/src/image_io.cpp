#include "vistrip/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#ifndef VISTRIP_HAVE_PNG
#define VISTRIP_HAVE_PNG 0
#endif
#if VISTRIP_HAVE_PNG
#include <png.h>
#endif

namespace vistrip::io {

namespace {

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void require_rgb(const Tensor& frame, const char* what) {
  if (frame.rank() != 3 || frame.extent(2) != 3)
    throw ShapeError(std::string(what) + ": expected [H,W,3], got " + vistrip::to_string(frame.shape()));
}

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& b) : bytes_(b) {}

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    std::size_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (v > (1u << 24)) fail(start, std::string(what) + " too large");
      ++pos_;
    }
    if (pos_ == start) fail(start, std::string("expected ") + what);
    return v;
  }

  [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
    throw FormatError("ppm: " + msg + " at byte offset " + std::to_string(at));
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string encode_ppm(const Tensor& frame) {
  require_rgb(frame, "encode_ppm");
  const std::size_t h = frame.extent(0), w = frame.extent(1);
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + frame.size());
  for (double v : frame.data()) out.push_back(static_cast<char>(to_byte(v)));
  return out;
}

Tensor decode_ppm(const std::string& bytes) {
  HeaderReader r(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') r.fail(0, "missing P6 magic");
  r.advance(2);
  if (r.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[r.pos()])))
    r.fail(r.pos(), "expected whitespace after magic");
  const std::size_t w = r.number("width");
  const std::size_t h = r.number("height");
  if (w == 0 || h == 0) r.fail(r.pos(), "zero image extent");
  r.skip_space();
  const std::size_t maxval_at = r.pos();
  const std::size_t maxval = r.number("maxval");
  if (maxval != 255) r.fail(maxval_at, "unsupported maxval " + std::to_string(maxval));
  std::size_t data_at = r.pos();
  if (data_at >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[data_at])))
    r.fail(data_at, "expected whitespace before pixel data");
  ++data_at;
  const std::size_t need = w * h * 3;
  if (bytes.size() - data_at < need)
    r.fail(bytes.size(), "truncated pixel data (need " + std::to_string(need) + " bytes)");
  Tensor out({h, w, 3});
  for (std::size_t i = 0; i < need; ++i)
    out[i] = static_cast<double>(static_cast<unsigned char>(bytes[data_at + i])) / 255.0;
  return out;
}

void write_ppm(const std::filesystem::path& path, const Tensor& frame) {
  const std::string bytes = encode_ppm(frame);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("write failed: " + path.string());
}

Tensor read_ppm(const std::filesystem::path& path) {
  try {
    return decode_ppm(slurp(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Tensor quantize(const Tensor& frame) {
  Tensor out(frame.shape());
  for (std::size_t i = 0; i < frame.size(); ++i) out[i] = static_cast<double>(to_byte(frame[i])) / 255.0;
  return out;
}

bool png_supported() { return VISTRIP_HAVE_PNG != 0; }

void write_png(const std::filesystem::path& path, const Tensor& frame) {
  require_rgb(frame, "write_png");
#if VISTRIP_HAVE_PNG
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(frame.extent(1));
  img.height = static_cast<png_uint_32>(frame.extent(0));
  img.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> px(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) px[i] = to_byte(frame[i]);
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, px.data(), 0, nullptr))
    throw Error("png write failed: " + path.string() + ": " + img.message);
#else
  (void)path;
  throw Error("built without PNG support");
#endif
}

void write_sequence(const std::filesystem::path& dir, const Tensor& video, bool png) {
  if (video.rank() != 4) throw ShapeError("write_sequence: expected [T,H,W,3]");
  std::filesystem::create_directories(dir);
  for (std::size_t t = 0; t < video.extent(0); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.%s", t, png ? "png" : "ppm");
    if (png)
      write_png(dir / name, frame(video, t));
    else
      write_ppm(dir / name, frame(video, t));
  }
}

Tensor read_sequence(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("frame_", 0) == 0 && e.path().extension() == ".ppm")
      files.push_back(e.path());
  }
  if (files.empty()) throw Error("no frame_*.ppm files in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<Tensor> frames;
  for (const auto& f : files) {
    frames.push_back(read_ppm(f));
    if (frames.back().shape() != frames.front().shape())
      throw ShapeError("frame size differs in " + f.string());
  }
  return stack_frames(frames);
}

}  // namespace vistrip::io
