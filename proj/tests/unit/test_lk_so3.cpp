#include <gtest/gtest.h>

#include "amc/errors.hpp"
#include "amc/lk_so3.hpp"
#include "test_support.hpp"

namespace amc {
namespace {

struct Pair {
  Frame tpl;
  Frame cur;
  RotationMatrix truth;  // what track() should return
};

// Template rendered at `base`, current at base * rt. The current pixel that
// matches template pixel p lies at rt^T p, so the tracker returns rt^T.
Pair render_pair(const RotationMatrix& base, const RotationMatrix& rt) {
  const auto& src = test::smooth_source_1024();
  const Intrinsics k = test::camera_320x180();
  return {rgb_to_gray(render_view(src, base, k)), rgb_to_gray(render_view(src, base * rt, k)),
          rt.transpose()};
}

TEST(Template, ConstantImageIsDegenerate) {
  const Frame flat(320, 180, 1, 0.4f);
  EXPECT_THROW(Template::build(flat, test::camera_320x180()), DegenerateTemplateError);
}

TEST(Template, RejectsColor) {
  EXPECT_THROW(Template::build(Frame(8, 8, 3), test::camera_320x180()), DataError);
}

TEST(Template, NormalEquationsMatchBruteForce) {
  const Intrinsics k = test::camera_320x180();
  const Pair p = render_pair(RotationMatrix::Identity(), test::rot_x(0.02) * test::rot_y(-0.03));
  const Template tpl = Template::build(p.tpl, k);
  const GradientField g = sobel_gradients(p.tpl);

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  std::vector<Eigen::Vector3d> jac;
  for (int y = 0; y < 180; ++y) {
    for (int v = 0; v < 320; ++v) {
      const double x = (v - k.cx) / k.fx;
      const double yy = (y - k.cy) / k.fy;
      const Eigen::Vector3d du(-x * yy, 1.0 + x * x, -yy);
      const Eigen::Vector3d dv(-(1.0 + yy * yy), x * yy, x);
      const Eigen::Vector3d j = g.gx.at(v, y) * k.fx * du + g.gy.at(v, y) * k.fy * dv;
      jac.push_back(j);
      h += j * j.transpose();
    }
  }
  EXPECT_LT((tpl.hessian() - h).norm() / h.norm(), 1e-12);

  // Residual vector through the normalized-coordinate warp.
  const RotationMatrix r = exp_so3(So3Vector(0.001, -0.002, 0.0005));
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  std::size_t i = 0;
  float s = 0.0f;
  for (int y = 0; y < 180; ++y) {
    for (int v = 0; v < 320; ++v, ++i) {
      const auto q = rotational_warp(r, k.pixel_to_normalized(PixelCoord(v, y)));
      const PixelCoord px = k.normalized_to_pixel(*q);
      if (!bilinear_sample(p.cur, px.x(), px.y(), &s)) continue;
      b += (static_cast<double>(p.tpl.at(v, y)) - s) * jac[i];
    }
  }
  const GaussNewtonStep step = gauss_newton_step(tpl, p.cur, r);
  const Eigen::Vector3d omega = h.ldlt().solve(b);
  EXPECT_LT((step.omega - omega).norm() / omega.norm(), 1e-6);
  EXPECT_LT((evaluate_alignment(tpl, p.cur, r).weighted - b).norm() / b.norm(), 1e-6);
}

TEST(Track, RecoversThreeDegrees) {
  const RotationMatrix rt = test::angle_axis(3.0 * kDegToRad, Eigen::Vector3d(0.3, -1.0, 0.4));
  const Pair p = render_pair(test::rot_x(0.05), rt);
  const Template tpl = Template::build(p.tpl, test::camera_320x180());
  const TrackResult res = track(tpl, p.cur, RotationMatrix::Identity());
  EXPECT_TRUE(res.converged);
  EXPECT_LT(geodesic_distance(res.rotation, p.truth) * kRadToDeg, 0.1);
  EXPECT_TRUE(is_rotation(res.rotation, 1e-9));
}

TEST(Track, LossStrictlyDecreases) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Pair p = render_pair(RotationMatrix::Identity(), test::random_rotation(rng, 4.0 * kDegToRad));
    const Template tpl = Template::build(p.tpl, test::camera_320x180());
    const TrackResult res = track(tpl, p.cur, RotationMatrix::Identity());
    ASSERT_GE(res.loss_history.size(), 2u);
    for (std::size_t i = 1; i < res.loss_history.size(); ++i) {
      EXPECT_LT(res.loss_history[i], res.loss_history[i - 1]);
    }
    EXPECT_EQ(res.final_loss, res.loss_history.back());
  }
}

TEST(Track, WarmStartNeedsFewIterations) {
  const RotationMatrix step = test::angle_axis(0.8 * kDegToRad, Eigen::Vector3d(1.0, 0.5, -0.2));
  const auto& src = test::smooth_source_1024();
  const Intrinsics k = test::camera_320x180();
  const Frame f0 = rgb_to_gray(render_view(src, RotationMatrix::Identity(), k));
  const Frame f1 = rgb_to_gray(render_view(src, step, k));
  const Frame f2 = rgb_to_gray(render_view(src, step * step, k));
  const Template tpl = Template::build(f0, k);
  const TrackResult r1 = track(tpl, f1, RotationMatrix::Identity());
  const TrackResult cold = track(tpl, f2, RotationMatrix::Identity());
  // Constant-velocity extrapolation of the previous estimate.
  const TrackResult warm = track(tpl, f2, r1.rotation * r1.rotation);
  EXPECT_LE(warm.iterations, 3);
  EXPECT_LT(warm.iterations, cold.iterations);
  EXPECT_LT(geodesic_distance(warm.rotation, (step * step).transpose()) * kRadToDeg, 0.05);
  // Restarting from a converged estimate stops at once.
  EXPECT_LE(track(tpl, f2, warm.rotation).iterations, 2);
}

TEST(Track, InsufficientOverlapThrows) {
  const Pair p = render_pair(RotationMatrix::Identity(), RotationMatrix::Identity());
  const Template tpl = Template::build(p.tpl, test::camera_320x180());
  EXPECT_THROW(track(tpl, p.cur, test::rot_y(40.0 * kDegToRad)), InsufficientOverlapError);
  const AlignmentResidual e = evaluate_alignment(tpl, p.cur, test::rot_y(40.0 * kDegToRad));
  EXPECT_LT(e.valid_count, e.total_count / 2);
}

TEST(Track, IdenticalFramesGiveIdentity) {
  const Pair p = render_pair(RotationMatrix::Identity(), RotationMatrix::Identity());
  const Template tpl = Template::build(p.tpl, test::camera_320x180());
  const TrackResult res = track(tpl, p.cur, RotationMatrix::Identity());
  EXPECT_EQ(res.rotation, RotationMatrix::Identity());
  EXPECT_LT(res.final_loss, 1e-20);
  EXPECT_EQ(res.iterations, 1);
}

TEST(TrackerConfig, Validation) {
  TrackerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.min_valid_fraction = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace amc
