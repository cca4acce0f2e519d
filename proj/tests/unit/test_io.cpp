#include <gtest/gtest.h>

#include <fstream>

#include "amc/errors.hpp"
#include "amc/io.hpp"
#include "test_support.hpp"

namespace amc {
namespace {

TEST(Png, RoundTripIsExactOnByteValues) {
  const auto dir = test::scratch_dir("png_roundtrip");
  Frame f(17, 5, 3);
  int v = 0;
  for (float& x : f.data()) x = static_cast<float>((v++ * 37) % 256) / 255.0f;
  write_png(dir / "a.png", f);
  const Frame g = read_png(dir / "a.png");
  ASSERT_TRUE(g.same_shape(f));
  EXPECT_EQ(test::max_abs_diff(f, g), 0.0);
}

TEST(Png, RoundsHalfUpAndClamps) {
  const auto dir = test::scratch_dir("png_round");
  Frame f(4, 1, 1);
  f.at(0, 0) = 0.51f / 255.0f;
  f.at(1, 0) = 0.49f / 255.0f;
  f.at(2, 0) = -0.3f;
  f.at(3, 0) = 1.7f;
  write_png(dir / "g.png", f);
  const Frame g = read_png(dir / "g.png");
  ASSERT_EQ(g.channels(), 1);
  EXPECT_EQ(g.at(0, 0), 1.0f / 255.0f);
  EXPECT_EQ(g.at(1, 0), 0.0f);
  EXPECT_EQ(g.at(2, 0), 0.0f);
  EXPECT_EQ(g.at(3, 0), 1.0f);
}

TEST(Png, MissingOrCorruptFileThrowsDataError) {
  const auto dir = test::scratch_dir("png_bad");
  EXPECT_THROW(read_png(dir / "missing.png"), DataError);
  std::ofstream(dir / "bad.png") << "not a png";
  EXPECT_THROW(read_png(dir / "bad.png"), DataError);
}

TEST(Remap, RoundTripAndHeaderCheck) {
  const auto dir = test::scratch_dir("remap");
  RemapTable t{3, 2, {0.5f, 1.5f, 2.0f, 0.0f, -1.0f, 7.25f, 1.0f, 1.0f, 2.0f, 1.0f, 0.0f, 0.0f}};
  write_remap(dir / "r.bin", t);
  const RemapTable u = read_remap(dir / "r.bin");
  EXPECT_EQ(u.width, 3);
  EXPECT_EQ(u.height, 2);
  EXPECT_EQ(u.xy, t.xy);
  // Header layout: magic, then H before W.
  std::ifstream in(dir / "r.bin", std::ios::binary);
  char magic[8];
  std::uint32_t h = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&h), 4);
  EXPECT_EQ(std::string(magic, 8), "AMCREMAP");
  EXPECT_EQ(h, 2u);
  std::ofstream(dir / "bad.bin", std::ios::binary) << "AMCREMAX";
  EXPECT_THROW(read_remap(dir / "bad.bin"), DataError);
}

TEST(Files, PngListingIsSorted) {
  const auto dir = test::scratch_dir("listing");
  const Frame f(2, 2, 1);
  for (const char* name : {"000010.png", "000002.png", "000001.png"}) write_png(dir / name, f);
  std::ofstream(dir / "notes.txt") << "x";
  const auto files = list_png_files(dir);
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(files[0].filename(), "000001.png");
  EXPECT_EQ(files[2].filename(), "000010.png");
}

}  // namespace
}  // namespace amc
