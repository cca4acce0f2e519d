#pragma once

#include <Eigen/Geometry>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "amc/geometry.hpp"
#include "amc/image.hpp"
#include "amc/synthetic.hpp"

namespace amc::test {

// Independent rotation oracle built on Eigen's angle-axis type.
inline RotationMatrix angle_axis(double angle, const Eigen::Vector3d& axis) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

inline RotationMatrix rot_x(double a) { return angle_axis(a, Eigen::Vector3d::UnitX()); }
inline RotationMatrix rot_y(double a) { return angle_axis(a, Eigen::Vector3d::UnitY()); }
inline RotationMatrix rot_z(double a) { return angle_axis(a, Eigen::Vector3d::UnitZ()); }

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline RotationMatrix random_rotation(std::mt19937_64& rng, double max_angle) {
  std::uniform_real_distribution<double> u(0.0, max_angle);
  return angle_axis(u(rng), random_unit(rng));
}

inline Frame random_frame(std::mt19937_64& rng, int w, int h, int c) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Frame f(w, h, c);
  for (float& v : f.data()) v = u(rng);
  return f;
}

inline double max_abs_diff(const Frame& a, const Frame& b) {
  double m = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(da[i]) - db[i]));
  }
  return m;
}

inline Intrinsics camera_320x180() { return intrinsics_from_fov(320, 180, 60.0); }

// Reduced-size sources keep unit tests fast.
inline const SourceImage& smooth_source_1024() {
  static const SourceImage s = make_source(SourceKind::kSmooth, 1024, 120.0, 7);
  return s;
}

inline const SourceImage& detailed_source_1024() {
  static const SourceImage s = make_source(SourceKind::kNoise, 1024, 120.0, 7);
  return s;
}

// Fresh, empty directory under the system temp dir, private to this process.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("amc_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace amc::test
