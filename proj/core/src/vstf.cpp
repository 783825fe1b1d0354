#include "vistrip/vstf.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace vistrip {

namespace {

template <class U>
void put_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> b{};
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), b.size());
}

template <class U>
U get_le(std::istream& is, const char* what) {
  std::array<unsigned char, sizeof(U)> b{};
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!is) throw FormatError(std::string("VSTF: truncated while reading ") + what);
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

}  // namespace

std::size_t vstf_encoded_size(const Shape& shape) {
  return 4 + 4 + 1 + 8 * shape.size() + 4 * numel(shape);
}

void write_vstf(std::ostream& os, const Tensor& t) {
  os.write("VSTF", 4);
  put_le<std::uint32_t>(os, kVstfVersion);
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.rank()));
  for (std::size_t e : t.shape()) put_le<std::uint64_t>(os, e);
  for (double v : t.data()) put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  if (!os) throw Error("VSTF: write failed");
}

Tensor read_vstf(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "VSTF", 4) != 0) throw FormatError("VSTF: bad magic");
  const auto version = get_le<std::uint32_t>(is, "version");
  if (version != kVstfVersion) throw FormatError("VSTF: unsupported version " + std::to_string(version));
  const auto rank = get_le<std::uint8_t>(is, "rank");
  if (rank == 0 || rank > Tensor::kMaxRank) throw FormatError("VSTF: invalid rank " + std::to_string(rank));
  Shape shape(rank);
  for (auto& e : shape) e = static_cast<std::size_t>(get_le<std::uint64_t>(is, "extent"));
  std::vector<double> data(numel(shape));
  for (double& v : data) v = std::bit_cast<float>(get_le<std::uint32_t>(is, "payload"));
  return Tensor(std::move(shape), std::move(data));
}

void save_vstf(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_vstf(os, t);
}

Tensor load_vstf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return read_vstf(is);
}

void round_to_f32(Tensor& t) {
  for (double& v : t.data()) v = static_cast<float>(v);
}

}  // namespace vistrip
