#include "amc/geometry.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <fstream>

#include "amc/errors.hpp"

namespace amc {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  // clang-format off
  s <<     0.0, -v.z(),  v.y(),
         v.z(),    0.0, -v.x(),
        -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Eigen::Vector3d vee(const Eigen::Matrix3d& m) {
  return {m(2, 1), m(0, 2), m(1, 0)};
}

RotationMatrix exp_so3(const So3Vector& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d k = skew(omega);
  if (theta < kExpTaylorThreshold) {
    return Eigen::Matrix3d::Identity() + k + 0.5 * k * k;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * k + b * k * k;
}

namespace {

// Returns (angle, 2 sin(angle) * axis).
std::pair<double, Eigen::Vector3d> angle_and_scaled_axis(const RotationMatrix& r) {
  const Eigen::Vector3d v = vee(r - r.transpose());
  const double s = 0.5 * v.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  return {std::atan2(s, c), v};
}

}  // namespace

So3Vector log_so3(const RotationMatrix& r) {
  const auto [theta, v] = angle_and_scaled_axis(r);
  if (theta >= kPi - kLogAntipodalMargin) throw NearAntipodalError(theta);
  if (theta < kLogSmallAngle) return 0.5 * v;
  return (theta / (2.0 * std::sin(theta))) * v;
}

double rotation_angle(const RotationMatrix& r) {
  return angle_and_scaled_axis(r).first;
}

double geodesic_distance(const RotationMatrix& a, const RotationMatrix& b) {
  return rotation_angle(a.transpose() * b);
}

bool is_rotation(const RotationMatrix& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

RotationMatrix orthonormalize(const RotationMatrix& r) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    out = u * svd.matrixV().transpose();
  }
  return out;
}

WarpJacobian warp_jacobian(const NormalizedCoord& p) {
  const double x = p.x();
  const double y = p.y();
  WarpJacobian j;
  // clang-format off
  j << -x * y,        1.0 + x * x, -y,
       -(1.0 + y * y), x * y,        x;
  // clang-format on
  return j;
}

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k;
  // clang-format off
  k << fx, 0.0, cx,
       0.0, fy, cy,
       0.0, 0.0, 1.0;
  // clang-format on
  return k;
}

Intrinsics Intrinsics::downsampled(int factor) const {
  Intrinsics k = *this;
  const double f = static_cast<double>(factor);
  k.fx /= f;
  k.fy /= f;
  k.cx /= f;
  k.cy /= f;
  k.width /= factor;
  k.height /= factor;
  return k;
}

Intrinsics Intrinsics::cropped(int left, int top, int new_width, int new_height) const {
  Intrinsics k = *this;
  k.cx -= left;
  k.cy -= top;
  k.width = new_width;
  k.height = new_height;
  return k;
}

void Intrinsics::validate() const {
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy)) {
    throw ConfigError("intrinsics must be finite");
  }
  if (fx <= 0.0 || fy <= 0.0) throw ConfigError("intrinsics need fx > 0 and fy > 0");
  if (width < 0 || height < 0) throw ConfigError("intrinsics image size must be non-negative");
}

Intrinsics intrinsics_from_fov(int width, int height, double horizontal_fov_deg) {
  const double f = 0.5 * width / std::tan(0.5 * horizontal_fov_deg * kDegToRad);
  return {f, f, 0.5 * (width - 1), 0.5 * (height - 1), width, height};
}

void to_json(nlohmann::json& j, const Intrinsics& k) {
  j = nlohmann::json{{"fx", k.fx},       {"fy", k.fy},        {"cx", k.cx},
                     {"cy", k.cy},       {"width", k.width}, {"height", k.height}};
}

void from_json(const nlohmann::json& j, Intrinsics& k) {
  try {
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.value("width", 0);
    k.height = j.value("height", 0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad intrinsics: ") + e.what());
  }
  k.validate();
}

Intrinsics load_intrinsics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open intrinsics file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return j.get<Intrinsics>();
}

}  // namespace amc
