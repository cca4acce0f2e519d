#include <gtest/gtest.h>

#include "amc/errors.hpp"
#include "amc/view_filter.hpp"
#include "test_support.hpp"

namespace amc {
namespace {

TEST(ViewFilter, DefaultsAt60Fps) {
  const ViewFilterParams p = ViewFilterParams::from_dt(1.0 / 60.0);
  EXPECT_NEAR(p.a, 1.0 / 30.0, 1e-15);
  EXPECT_NEAR(p.b, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(p.gain(0.0), p.a);
  EXPECT_DOUBLE_EQ(p.gain(0.1), p.a + 0.1 * p.b);
  EXPECT_DOUBLE_EQ(p.gain(10.0), 1.0);
  EXPECT_THROW((ViewFilterParams{-1.0, 0.0, 0.1}.validate()), ConfigError);
  EXPECT_THROW((ViewFilterParams{0.1, 0.1, 0.0}.validate()), ConfigError);
}

TEST(ViewFilter, SingleAxisMatchesScalarRecursion) {
  const ViewFilterParams p = ViewFilterParams::from_dt(1.0 / 60.0);
  const Eigen::Vector3d axis = Eigen::Vector3d(0.2, 1.0, -0.4).normalized();
  ViewState s;
  double theta_view = 0.0;
  for (int j = 0; j < 200; ++j) {
    const double theta_est = 0.2 * std::sin(0.05 * j) + 0.01 * std::sin(2.5 * j);
    s = update_view(s, test::angle_axis(theta_est, axis), p).state;
    const double e = theta_est - theta_view;
    theta_view += std::min(1.0, p.a + p.b * std::abs(e)) * e;
    EXPECT_LT(geodesic_distance(s.r_view, test::angle_axis(theta_view, axis)), 1e-12);
  }
}

TEST(ViewFilter, ContractsTowardsFixedTarget) {
  const ViewFilterParams p = ViewFilterParams::from_dt(1.0 / 60.0);
  std::mt19937_64 rng(3);
  const RotationMatrix target = test::random_rotation(rng, 0.8);
  ViewState s;
  double prev = geodesic_distance(s.r_view, target);
  for (int j = 0; j < 300; ++j) {
    s = update_view(s, target, p).state;
    const double d = geodesic_distance(s.r_view, target);
    EXPECT_LT(d, prev + 1e-15);
    prev = d;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(ViewFilter, AttenuatesTwelveHertzShake) {
  const double dt = 1.0 / 60.0;
  const ViewFilterParams p = ViewFilterParams::from_dt(dt);
  const double amp = 1.0 * kDegToRad;
  ViewState s;
  double out_peak = 0.0;
  for (int j = 0; j < 600; ++j) {
    const RotationMatrix est = test::rot_z(amp * std::sin(2.0 * kPi * 12.0 * j * dt));
    s = update_view(s, est, p).state;
    if (j >= 120) out_peak = std::max(out_peak, rotation_angle(s.r_view));
  }
  EXPECT_LT(out_peak, 0.35 * amp);
}

TEST(ViewFilter, UnitGainSnapsExactly) {
  const ViewFilterParams p{1.0, 0.0, 1.0 / 60.0};
  const RotationMatrix target = test::rot_x(0.3) * test::rot_y(-0.2);
  const ViewUpdate u = update_view(ViewState{}, target, p);
  EXPECT_EQ(u.state.r_view, target);
  EXPECT_FALSE(u.snapped);
  // Large errors saturate the gain at 1.
  const ViewUpdate big = update_view(ViewState{}, test::rot_x(2.0), ViewFilterParams::from_dt(1.0 / 60.0));
  EXPECT_DOUBLE_EQ(big.gain, 1.0);
  EXPECT_EQ(big.state.r_view, test::rot_x(2.0));
}

TEST(ViewFilter, AntipodalEstimateSnaps) {
  const ViewUpdate u = update_view(ViewState{}, test::rot_y(kPi), ViewFilterParams::from_dt(1.0 / 60.0));
  EXPECT_TRUE(u.snapped);
  EXPECT_EQ(u.state.r_view, test::rot_y(kPi));
}

TEST(ViewFilter, AngularVelocity) {
  EXPECT_NEAR(view_angular_velocity(RotationMatrix::Identity(), test::rot_x(kDegToRad), 1.0 / 60.0),
              60.0, 1e-9);
  EXPECT_THROW(view_angular_velocity(RotationMatrix::Identity(), RotationMatrix::Identity(), 0.0),
               ConfigError);
}

}  // namespace
}  // namespace amc
