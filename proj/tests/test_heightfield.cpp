#include "surftopo/errors.hpp"
#include "surftopo/heightfield.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

using namespace surftopo;

namespace {

std::string be16(unsigned v) {
  std::string s;
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
  s.push_back(static_cast<char>(v & 0xFF));
  return s;
}

// 3 x 3 fixture; row j = 0 is the lowest y.
HeightField fixture() {
  HeightField hf(3, 3, 0.5, 0.5);
  const double v[9] = {0, 1, 2, 3, 4, 5, 5, 5, 0};
  for (std::size_t k = 0; k < 9; ++k) hf.heights[k] = v[k];
  return hf;
}

}  // namespace

TEST(HeightFieldCsv, RoundTripIsExact) {
  std::mt19937 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  HeightField hf(17, 9, 0.0123, 0.0456);
  hf.x0 = -1.0 / 3.0;
  hf.y0 = 2.5;
  for (double& h : hf.heights) h = n(rng);
  hf.mask(4, 2);
  hf.mask(16, 8);
  std::ostringstream out;
  write_heightfield_csv(hf, out);
  std::istringstream in(out.str());
  const HeightField back = read_heightfield_csv(in);
  ASSERT_EQ(back.nx, hf.nx);
  ASSERT_EQ(back.ny, hf.ny);
  EXPECT_EQ(back.dx, hf.dx);
  EXPECT_EQ(back.dy, hf.dy);
  EXPECT_EQ(back.x0, hf.x0);
  EXPECT_EQ(back.y0, hf.y0);
  EXPECT_EQ(back.valid, hf.valid);
  for (std::size_t k = 0; k < hf.size(); ++k) {
    if (hf.valid[k]) EXPECT_EQ(back.heights[k], hf.heights[k]);
    else EXPECT_TRUE(std::isnan(back.heights[k]));
  }
}

TEST(HeightFieldCsv, RejectsMalformedInput) {
  std::istringstream ragged("1,2,3\n4,5\n");
  EXPECT_THROW(read_heightfield_csv(ragged), ParseError);
  std::istringstream text("1,abc\n");
  EXPECT_THROW(read_heightfield_csv(text), ParseError);
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(read_heightfield_csv(empty), ParseError);
  std::istringstream mismatch("# nx=3 ny=1\n1,2\n");
  EXPECT_THROW(read_heightfield_csv(mismatch), ParseError);
  EXPECT_THROW(read_heightfield_csv(std::filesystem::path("/nonexistent/h.csv")), IoError);
}

TEST(Pgm16, GoldenFixture) {
  // min 0, max 5: level = k * 65535 / 5 = k * 13107; top image row is j = 2.
  std::string expected = "P5\n# surftopo offset_um=0 scale_um_per_level=";
  expected += "7.629510948348211e-05";
  expected += "\n3 3\n65535\n";
  for (unsigned v : {5u, 5u, 0u, 3u, 4u, 5u, 0u, 1u, 2u}) expected += be16(v * 13107u);
  std::ostringstream out;
  write_pgm16(fixture(), out);
  EXPECT_EQ(out.str(), expected);
}

TEST(Pgm16, ConstantFieldIsAllZero) {
  HeightField hf(2, 2, 1.0, 1.0);
  for (double& h : hf.heights) h = 7.0;
  std::ostringstream out;
  write_pgm16(hf, out);
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, 3), "P5\n");
  EXPECT_EQ(s.substr(s.size() - 8), std::string(8, '\0'));
}

TEST(Pgm16, FixedRangeClipsAndMasksAreZero) {
  HeightField hf = fixture();
  hf.mask(1, 0);
  std::ostringstream out;
  write_pgm16(hf, out, RenderRange{1.0, 3.0});
  const std::string s = out.str();
  EXPECT_NE(s.find("range_um=1:3 clipped=6"), std::string::npos);
  // Bottom image row (j = 0): 0 clipped to 0, masked -> 0, 2 -> half range.
  const std::string tail = s.substr(s.size() - 6);
  EXPECT_EQ(tail, be16(0) + be16(0) + be16(32768));
  EXPECT_THROW(write_pgm16(hf, out, RenderRange{2.0, 2.0}), DomainError);
}

TEST(Ppm, ExtremesMapToBlueAndRed) {
  HeightField hf(2, 1, 1.0, 1.0);
  hf.heights = {0.0, 1.0};
  std::ostringstream out;
  write_ppm(hf, out);
  const std::string s = out.str();
  const std::string pixels = s.substr(s.size() - 6);
  EXPECT_EQ(pixels, std::string("\x00\x00\xff\xff\x00\x00", 6));
}
