#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <optional>
#include <string>

#include <json.hpp>

namespace amc {

/// Element of so(3): axis-angle vector, magnitude in radians.
using So3Vector = Eigen::Vector3d;
/// Element of SO(3).
using RotationMatrix = Eigen::Matrix3d;
/// Image-plane coordinate (x, y) with implicit z = 1.
using NormalizedCoord = Eigen::Vector2d;
/// Continuous pixel coordinate (column, row).
using PixelCoord = Eigen::Vector2d;
/// d(warped normalized coordinate) / d(omega) at omega = 0.
using WarpJacobian = Eigen::Matrix<double, 2, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kRadToDeg = 180.0 / kPi;
inline constexpr double kDegToRad = kPi / 180.0;

// Below this angle exp() switches to a second-order Taylor expansion.
inline constexpr double kExpTaylorThreshold = 1e-8;
// Below this angle log() uses first-order skew extraction.
inline constexpr double kLogSmallAngle = 1e-6;
// log() refuses rotations with angle >= pi - kLogAntipodalMargin.
inline constexpr double kLogAntipodalMargin = 1e-6;
// Minimum homogeneous z for a warped ray to count as in front of the camera.
inline constexpr double kMinWarpDepth = 1e-6;

Eigen::Matrix3d skew(const Eigen::Vector3d& v);
Eigen::Vector3d vee(const Eigen::Matrix3d& m);

/// Rodrigues formula. Total over finite input.
RotationMatrix exp_so3(const So3Vector& omega);

/// Principal logarithm. Throws NearAntipodalError when the angle is within
/// 1e-6 of pi.
So3Vector log_so3(const RotationMatrix& r);

/// Rotation angle of r, in [0, pi]. Defined for every rotation including
/// the antipodal ones that log_so3 rejects.
double rotation_angle(const RotationMatrix& r);

/// Angle of a^T b.
double geodesic_distance(const RotationMatrix& a, const RotationMatrix& b);

bool is_rotation(const RotationMatrix& r, double tol = 1e-9);

/// Re-orthonormalizes a matrix that has drifted off SO(3) through repeated
/// products.
RotationMatrix orthonormalize(const RotationMatrix& r);

/// Pixel correspondence induced by a pure camera rotation: q = r [p; 1],
/// returns (q.x / q.z, q.y / q.z). Empty when q.z <= kMinWarpDepth.
inline std::optional<NormalizedCoord> rotational_warp(const RotationMatrix& r,
                                                      const NormalizedCoord& p) {
  const double qz = r(2, 0) * p.x() + r(2, 1) * p.y() + r(2, 2);
  if (!(qz > kMinWarpDepth)) return std::nullopt;
  const double qx = r(0, 0) * p.x() + r(0, 1) * p.y() + r(0, 2);
  const double qy = r(1, 0) * p.x() + r(1, 1) * p.y() + r(1, 2);
  return NormalizedCoord(qx / qz, qy / qz);
}

/// Jacobian of rotational_warp(r * exp(omega), p) at r = I, omega = 0:
///   d x'/d omega = [-x y, 1 + x^2, -y]
///   d y'/d omega = [-(1 + y^2), x y, x]
WarpJacobian warp_jacobian(const NormalizedCoord& p);

/// Pinhole intrinsics. Pixel (u, v) = (fx x + cx, fy y + cy).
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  NormalizedCoord pixel_to_normalized(const PixelCoord& pixel) const {
    return {(pixel.x() - cx) / fx, (pixel.y() - cy) / fy};
  }
  PixelCoord normalized_to_pixel(const NormalizedCoord& p) const {
    return {fx * p.x() + cx, fy * p.y() + cy};
  }

  Eigen::Matrix3d matrix() const;

  /// Intrinsics after block-downsampling by `factor`.
  Intrinsics downsampled(int factor) const;
  /// Intrinsics of the sub-image starting at (left, top).
  Intrinsics cropped(int left, int top, int new_width, int new_height) const;

  /// Throws ConfigError unless fx, fy > 0 and all fields are finite.
  void validate() const;

  bool operator==(const Intrinsics&) const = default;
};

/// Pixel-to-pixel rotational warp H = K_src r K_dst^-1, evaluated row-wise.
/// The third row of H equals that of r K_dst^-1, so the depth test matches
/// rotational_warp.
class PixelWarp {
 public:
  PixelWarp(const RotationMatrix& r, const Intrinsics& k_src, const Intrinsics& k_dst)
      : h_(k_src.matrix() * r * k_dst.matrix().inverse()) {}

  /// Homogeneous image of pixel (0, y).
  Eigen::Vector3d row_start(int y) const { return h_.col(1) * y + h_.col(2); }

  /// Source pixel of (x, y) given row_start(y); false when behind the camera.
  bool map(const Eigen::Vector3d& start, int x, PixelCoord& out) const {
    const double qz = start.z() + h_(2, 0) * x;
    if (!(qz > kMinWarpDepth)) return false;
    out = PixelCoord((start.x() + h_(0, 0) * x) / qz, (start.y() + h_(1, 0) * x) / qz);
    return true;
  }

  const Eigen::Matrix3d& matrix() const { return h_; }

 private:
  Eigen::Matrix3d h_;
};

/// Pinhole camera with the given horizontal field of view and centered
/// principal point.
Intrinsics intrinsics_from_fov(int width, int height, double horizontal_fov_deg);

void to_json(nlohmann::json& j, const Intrinsics& k);
void from_json(const nlohmann::json& j, Intrinsics& k);

Intrinsics load_intrinsics(const std::string& path);

}  // namespace amc
