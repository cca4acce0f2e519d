#include <gtest/gtest.h>

#include "amc/errors.hpp"
#include "amc/orientation.hpp"
#include "test_support.hpp"

namespace amc {
namespace {

Frame gray_view(const SourceImage& src, const RotationMatrix& r) {
  return rgb_to_gray(render_view(src, r, test::camera_320x180()));
}

TEST(Orientation, TemplateResetSchedule) {
  OrientationTracker tracker(test::camera_320x180());
  const Frame f = gray_view(test::detailed_source_1024(), RotationMatrix::Identity());
  for (int j = 0; j < 16; ++j) {
    const OrientationEstimate e = tracker.process_frame(f);
    EXPECT_EQ(e.frame, j);
    const bool expect_reset = j == 4 || j == 9 || j == 14;
    EXPECT_EQ(e.diagnostics.template_reset, expect_reset) << "frame " << j;
    EXPECT_LT(rotation_angle(e.r_0j), 1e-9);
  }
}

TEST(Orientation, ConstantAngularVelocity) {
  const So3Vector w = Eigen::Vector3d(1.0, 2.0, 0.5).normalized() * (0.4 * kDegToRad);
  OrientationTracker tracker(test::camera_320x180());
  const auto& src = test::detailed_source_1024();
  for (int j = 0; j < 30; ++j) {
    const RotationMatrix truth = exp_so3(static_cast<double>(j) * w);
    const OrientationEstimate e = tracker.process_frame(gray_view(src, truth));
    EXPECT_LT(geodesic_distance(e.r_0j, truth) * kRadToDeg, 0.3) << "frame " << j;
    EXPECT_FALSE(e.diagnostics.tracking_lost);
  }
}

TEST(Orientation, LoopClosureDrift) {
  ShakeTrajectory t;
  t.fps = 60.0;
  t.duration = 2.0;
  const double d = kDegToRad;
  t.base = {{0.0, {0, 0, 0}}, {0.7, {3 * d, 5 * d, 0}}, {1.4, {-2 * d, -3 * d, 4 * d}}, {2.0, {0, 0, 0}}};
  for (auto& axis : t.perturbation) axis = {{0.3 * d, 12.0, 0.0}};
  const SyntheticSequence seq(test::detailed_source_1024(), t, test::camera_320x180());
  ASSERT_EQ(seq.size(), 120u);
  OrientationTracker tracker(test::camera_320x180());
  OrientationEstimate e;
  for (std::size_t j = 0; j <= 120; ++j) {
    // Frame 120 sits exactly at the loop end, where the ground truth is I.
    const RotationMatrix truth = t.at(0.0).transpose() * t.at(j / 60.0);
    e = tracker.process_frame(rgb_to_gray(render_view(seq.source(), t.at(j / 60.0), seq.intrinsics())));
    if (j == 120) EXPECT_LT(rotation_angle(truth), 1e-12);
  }
  EXPECT_LT(log_so3(e.r_0j).norm() * kRadToDeg, 1.0);
}

TEST(Orientation, LostTrackingFreezesAndResets) {
  // Very wide source so a 45 degree turn still renders.
  const SourceImage wide = make_source(SourceKind::kSmooth, 1024, 170.0, 3);
  OrientationTracker tracker(test::camera_320x180());
  tracker.process_frame(gray_view(wide, RotationMatrix::Identity()));
  const OrientationEstimate before = tracker.process_frame(gray_view(wide, test::rot_x(0.01)));
  const OrientationEstimate lost = tracker.process_frame(gray_view(wide, test::rot_y(45.0 * kDegToRad)));
  EXPECT_TRUE(lost.diagnostics.tracking_lost);
  EXPECT_TRUE(lost.diagnostics.template_reset);
  EXPECT_EQ(lost.r_0j, before.r_0j);
  const OrientationEstimate after = tracker.process_frame(gray_view(wide, test::rot_y(45.0 * kDegToRad)));
  EXPECT_FALSE(after.diagnostics.tracking_lost);
  EXPECT_LT(geodesic_distance(after.r_0j, before.r_0j), 1e-6);
}

TEST(Orientation, DegenerateFirstFrameDefersTemplate) {
  OrientationTracker tracker(test::camera_320x180());
  const OrientationEstimate e0 = tracker.process_frame(Frame(320, 180, 1, 0.5f));
  EXPECT_TRUE(e0.diagnostics.template_degenerate);
  EXPECT_FALSE(tracker.has_template());
  tracker.process_frame(gray_view(test::detailed_source_1024(), RotationMatrix::Identity()));
  EXPECT_TRUE(tracker.has_template());
}

TEST(Orientation, RejectsWrongFrames) {
  OrientationTracker tracker(test::camera_320x180());
  EXPECT_THROW(tracker.process_frame(Frame(320, 180, 3)), DataError);
  EXPECT_THROW(tracker.process_frame(Frame(160, 90, 1)), DataError);
  OrientationConfig bad;
  bad.n_track = 0;
  EXPECT_THROW(OrientationTracker(test::camera_320x180(), bad), ConfigError);
}

}  // namespace
}  // namespace amc
