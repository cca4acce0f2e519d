#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amc/geometry.hpp"
#include "amc/image.hpp"

namespace amc {

/// Gradient magnitudes below this are excluded from normal flow.
inline constexpr double kNormalFlowMinGradient = 15.0 / 255.0;

struct FrameMetrics {
  double nf_rms = 0.0;          // pixels / frame
  double delta_i_rms = 0.0;     // intensity
  double sharpness = 0.0;       // intensity / pixel
  double valid_pct = 100.0;     // percent
  double omega_img = 0.0;       // deg/s, estimated orientation
  double omega_view = 0.0;      // deg/s, rendering viewpoint
};

/// Pixels a metric may use: where `mask` counts reach `required`.
struct MetricMask {
  const ValidityMask* mask = nullptr;
  int required = 1;

  bool usable(int x, int y) const { return mask == nullptr || mask->at(x, y) >= required; }
};

struct NormalFlowResult {
  double rms = 0.0;
  std::size_t qualifying = 0;
  bool any_qualifying = false;
  /// Per-pixel |n(p)|, negative where the pixel was excluded.
  std::vector<float> magnitudes;
};

/// n(p) = -dI/dt grad I / |grad I|^2 with dI/dt = next - prev and spatial
/// gradients from 3x3 Sobel on `next` (gray, converted from color if
/// needed). Pixels with |grad I| < 15/255 are excluded, as are pixels whose
/// 3x3 neighbourhood is not usable in both masks.
NormalFlowResult normal_flow(const Frame& prev, const Frame& next, MetricMask prev_mask = {},
                             MetricMask next_mask = {});

/// sqrt(mean((next - prev)^2)) over all channels of jointly usable pixels.
double delta_i_rms(const Frame& prev, const Frame& next, MetricMask prev_mask = {},
                   MetricMask next_mask = {});

/// sqrt(mean over pixels and channels of gx^2 + gy^2).
double sharpness(const Frame& frame, MetricMask mask = {});

/// RMS over consecutive |log(R_{j-1}^T R_j)| / dt, degrees per second.
double angular_velocity_rms(std::span<const RotationMatrix> rotations, double dt);

/// Percentage of pixels whose count reaches `required`.
double valid_percentage(const ValidityMask& mask, int required);

}  // namespace amc
