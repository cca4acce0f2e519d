#include <gtest/gtest.h>

#include "amc/errors.hpp"
#include "amc/image.hpp"
#include "test_support.hpp"

namespace amc {
namespace {

// Direct 3x3 correlation with replicated borders, normalized by 1/8.
GradientField sobel_oracle(const Frame& f) {
  static const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  GradientField g{Frame(f.width(), f.height(), f.channels()), Frame(f.width(), f.height(), f.channels())};
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      for (int c = 0; c < f.channels(); ++c) {
        double sx = 0.0;
        double sy = 0.0;
        for (int j = -1; j <= 1; ++j) {
          for (int i = -1; i <= 1; ++i) {
            const int xx = std::clamp(x + i, 0, f.width() - 1);
            const int yy = std::clamp(y + j, 0, f.height() - 1);
            sx += kx[j + 1][i + 1] * f.at(xx, yy, c);
            sy += kx[i + 1][j + 1] * f.at(xx, yy, c);
          }
        }
        g.gx.at(x, y, c) = static_cast<float>(sx / 8.0);
        g.gy.at(x, y, c) = static_cast<float>(sy / 8.0);
      }
    }
  }
  return g;
}

TEST(Sobel, MatchesDirectConvolution) {
  std::mt19937_64 rng(1);
  const Frame f = test::random_frame(rng, 37, 23, 3);
  const GradientField got = sobel_gradients(f);
  const GradientField want = sobel_oracle(f);
  EXPECT_LT(test::max_abs_diff(got.gx, want.gx), 1e-6);
  EXPECT_LT(test::max_abs_diff(got.gy, want.gy), 1e-6);
}

TEST(Sobel, UnitRampGivesSlope) {
  Frame f(20, 10, 1);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 20; ++x) f.at(x, y) = static_cast<float>(0.01 * x + 0.02 * y);
  }
  const GradientField g = sobel_gradients(f);
  for (int y = 1; y < 9; ++y) {
    for (int x = 1; x < 19; ++x) {
      EXPECT_NEAR(g.gx.at(x, y), 0.01, 1e-6);
      EXPECT_NEAR(g.gy.at(x, y), 0.02, 1e-6);
    }
  }
}

TEST(Bilinear, ExactAtGridAndLinearInBetween) {
  Frame f(6, 5, 2);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 6; ++x) {
      f.at(x, y, 0) = static_cast<float>(0.1 * x - 0.05 * y + 0.3);
      f.at(x, y, 1) = static_cast<float>(x * y);
    }
  }
  float out[2];
  ASSERT_TRUE(bilinear_sample(f, 2.0, 3.0, out));
  EXPECT_EQ(out[0], f.at(2, 3, 0));
  EXPECT_EQ(out[1], f.at(2, 3, 1));
  ASSERT_TRUE(bilinear_sample(f, 2.25, 1.5, out));
  EXPECT_NEAR(out[0], 0.1 * 2.25 - 0.05 * 1.5 + 0.3, 1e-6);
  EXPECT_NEAR(out[1], 2.25 * 1.5, 1e-5);
  // Last row and column are reachable.
  ASSERT_TRUE(bilinear_sample(f, 5.0, 4.0, out));
  EXPECT_EQ(out[1], 20.0f);
  EXPECT_FALSE(bilinear_sample(f, 5.0001, 1.0, out));
  EXPECT_FALSE(bilinear_sample(f, -0.0001, 1.0, out));
  EXPECT_FALSE(bilinear_sample(f, 1.0, 4.5, out));
}

TEST(Color, GrayUsesRec601) {
  Frame f(1, 1, 3);
  f.at(0, 0, 0) = 1.0f;
  EXPECT_NEAR(rgb_to_gray(f).at(0, 0), 0.299, 1e-7);
  f.at(0, 0, 0) = 0.0f;
  f.at(0, 0, 1) = 1.0f;
  EXPECT_NEAR(rgb_to_gray(f).at(0, 0), 0.587, 1e-7);
  Frame g(2, 2, 1, 0.25f);
  EXPECT_EQ(test::max_abs_diff(rgb_to_gray(g), g), 0.0);
}

TEST(Downsample, BlockMean) {
  std::mt19937_64 rng(2);
  const Frame f = test::random_frame(rng, 16, 12, 3);
  const Frame d = downsample(f, 4);
  ASSERT_EQ(d.width(), 4);
  ASSERT_EQ(d.height(), 3);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 4; ++x) {
      for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) {
          for (int i = 0; i < 4; ++i) s += f.at(4 * x + i, 4 * y + j, c);
        }
        EXPECT_NEAR(d.at(x, y, c), s / 16.0, 1e-6);
      }
    }
  }
  EXPECT_THROW(downsample(f, 5), DataError);
  EXPECT_EQ(test::max_abs_diff(downsample(f, 1), f), 0.0);
}

TEST(Warp, InPlaneQuarterTurnPermutesPixels) {
  const int n = 31;
  const Intrinsics k{40.0, 40.0, 15.0, 15.0, n, n};
  std::mt19937_64 rng(3);
  const Frame src = test::random_frame(rng, n, n, 1);
  // Destination ray (x, y) maps to (-y, x) under Rz(90 deg): pixel (u, v)
  // samples (n - 1 - v, u).
  const auto [out, mask] = warp_frame(src, test::rot_z(kPi / 2), k, k);
  for (int v = 1; v < n - 1; ++v) {
    for (int u = 1; u < n - 1; ++u) {
      ASSERT_EQ(mask.at(u, v), 1);
      EXPECT_NEAR(out.at(u, v), src.at(n - 1 - v, u), 1e-5);
    }
  }
}

TEST(Warp, MaskMatchesBruteForceRayTest) {
  const Intrinsics k_src = intrinsics_from_fov(120, 90, 70.0);
  const Intrinsics k_dst = intrinsics_from_fov(100, 60, 60.0);
  std::mt19937_64 rng(4);
  const Frame src = test::random_frame(rng, 120, 90, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const RotationMatrix r = test::random_rotation(rng, 0.5);
    const auto [out, mask] = warp_frame(src, r, k_src, k_dst);
    int checked = 0;
    for (int y = 0; y < k_dst.height; ++y) {
      for (int x = 0; x < k_dst.width; ++x) {
        const Eigen::Vector3d d((x - k_dst.cx) / k_dst.fx, (y - k_dst.cy) / k_dst.fy, 1.0);
        const Eigen::Vector3d q = r * d;
        bool expect = false;
        double slack = 1.0;
        if (q.z() > 1e-6) {
          const double sx = k_src.fx * q.x() / q.z() + k_src.cx;
          const double sy = k_src.fy * q.y() / q.z() + k_src.cy;
          expect = sx >= 0 && sy >= 0 && sx <= k_src.width - 1 && sy <= k_src.height - 1;
          slack = std::min({std::abs(sx), std::abs(sy), std::abs(sx - (k_src.width - 1)),
                            std::abs(sy - (k_src.height - 1))});
        }
        if (slack < 1e-9) continue;  // on the boundary, rounding decides
        EXPECT_EQ(mask.at(x, y) == 1, expect) << x << "," << y;
        if (!expect) EXPECT_EQ(out.at(x, y), 0.0f);
        ++checked;
      }
    }
    EXPECT_GT(checked, 5000);
  }
}

TEST(Warp, AccumulateMatchesWarpFrame) {
  const Intrinsics k = intrinsics_from_fov(64, 48, 60.0);
  const Intrinsics k_out = k.cropped(8, 6, 48, 36);
  std::mt19937_64 rng(5);
  const Frame src = test::random_frame(rng, 64, 48, 3);
  const RotationMatrix r = test::random_rotation(rng, 0.1);
  const auto [out, mask] = warp_frame(src, r, k, k_out);
  std::vector<double> sum(48 * 36 * 3, 0.0);
  ValidityMask counts(48, 36);
  warp_accumulate(src, r, k, k_out, sum, counts);
  warp_accumulate(src, r, k, k_out, sum, counts);
  for (int i = 0; i < 48 * 36; ++i) {
    EXPECT_EQ(counts.counts()[i], 2 * mask.counts()[i]);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(sum[i * 3 + c], 2.0 * out.data()[i * 3 + c]);
  }
  std::vector<double> wrong(10);
  EXPECT_THROW(warp_accumulate(src, r, k, k_out, wrong, counts), DataError);
}

TEST(Crop, DefaultMarginGeometry) {
  const Frame f(320, 180, 3, 0.5f);
  const Margins m = margins_for(320, 180, 0.125);
  EXPECT_EQ(m.left, 40);
  EXPECT_EQ(m.top, 22);
  const Frame c = crop_margins(f, 0.125);
  EXPECT_EQ(c.width(), 240);
  EXPECT_EQ(c.height(), 136);
  EXPECT_THROW(margins_for(320, 180, 0.5), ConfigError);
  EXPECT_THROW(margins_for(320, 180, -0.1), ConfigError);
}

TEST(Crop, IdentityWarpIntoCroppedIntrinsicsEqualsCrop) {
  const Intrinsics k = test::camera_320x180();
  std::mt19937_64 rng(6);
  const Frame src = test::random_frame(rng, 320, 180, 3);
  const Intrinsics k_out = k.cropped(40, 22, 240, 136);
  const auto [out, mask] = warp_frame(src, RotationMatrix::Identity(), k, k_out);
  EXPECT_LT(test::max_abs_diff(out, crop_margins(src, 0.125)), 1e-6);
  EXPECT_EQ(mask.fraction_at_least(1), 1.0);
}

TEST(Remap, IdentityTableReproducesFrame) {
  std::mt19937_64 rng(7);
  const Frame src = test::random_frame(rng, 9, 7, 3);
  RemapTable t{9, 7, {}};
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) {
      t.xy.push_back(static_cast<float>(x));
      t.xy.push_back(static_cast<float>(y));
    }
  }
  EXPECT_LT(test::max_abs_diff(apply_remap(src, t), src), 1e-6);
  t.xy[0] = -3.0f;  // out of range samples become zero
  EXPECT_EQ(apply_remap(src, t).at(0, 0, 1), 0.0f);
}

TEST(Mask, FractionAtLeast) {
  ValidityMask m(2, 2);
  m.at(0, 0) = 3;
  m.at(1, 0) = 2;
  m.at(0, 1) = 3;
  EXPECT_DOUBLE_EQ(m.fraction_at_least(3), 0.5);
  EXPECT_DOUBLE_EQ(m.fraction_at_least(1), 0.75);
  EXPECT_DOUBLE_EQ(m.fraction_at_least(0), 1.0);
}

}  // namespace
}  // namespace amc
