#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "vistrip/random.hpp"
#include "vistrip/vstf.hpp"

using namespace vistrip;

TEST(Vstf, HeaderLayout) {
  std::ostringstream os;
  write_vstf(os, Tensor({2, 3}, 1.0));
  const std::string b = os.str();
  ASSERT_EQ(b.size(), vstf_encoded_size({2, 3}));
  EXPECT_EQ(b.size(), 4u + 4 + 1 + 2 * 8 + 6 * 4);
  EXPECT_EQ(b.substr(0, 4), "VSTF");
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 1);  // version, little-endian
  EXPECT_EQ(b[5], 0);
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 2);  // rank
  EXPECT_EQ(static_cast<unsigned char>(b[9]), 2);  // first extent
  EXPECT_EQ(static_cast<unsigned char>(b[17]), 3);
  // 1.0f = 0x3f800000
  EXPECT_EQ(static_cast<unsigned char>(b[25]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(b[28]), 0x3f);
}

TEST(Vstf, RoundTripIsExactForFloatValues) {
  Rng rng(1);
  Tensor t = random_normal({3, 4, 5}, rng);
  round_to_f32(t);
  std::stringstream ss;
  write_vstf(ss, t);
  EXPECT_TRUE(bit_equal(read_vstf(ss), t));
}

TEST(Vstf, FileRoundTrip) {
  Rng rng(2);
  Tensor t = random_normal({2, 2, 2, 3}, rng);
  round_to_f32(t);
  const auto path = std::filesystem::temp_directory_path() / "vistrip_vstf_test.vstf";
  save_vstf(path, t);
  EXPECT_TRUE(bit_equal(load_vstf(path), t));
  std::filesystem::remove(path);
}

TEST(Vstf, RejectsCorruptInput) {
  std::ostringstream os;
  write_vstf(os, Tensor({4}, 2.0));
  std::string b = os.str();

  std::string bad_magic = b;
  bad_magic[0] = 'X';
  std::istringstream m(bad_magic);
  EXPECT_THROW(read_vstf(m), FormatError);

  std::string bad_version = b;
  bad_version[4] = 2;
  std::istringstream v(bad_version);
  EXPECT_THROW(read_vstf(v), FormatError);

  std::istringstream t(b.substr(0, b.size() - 3));
  EXPECT_THROW(read_vstf(t), FormatError);
}
