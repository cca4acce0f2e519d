#include "amc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "amc/errors.hpp"

namespace amc {

namespace {

void require_same_shape(const Frame& a, const Frame& b, const char* what) {
  if (!a.same_shape(b)) throw DataError(std::string(what) + ": frame shape mismatch");
}

bool neighbourhood_usable(const MetricMask& m, int x, int y, int w, int h) {
  if (m.mask == nullptr) return true;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int xx = std::clamp(x + dx, 0, w - 1);
      const int yy = std::clamp(y + dy, 0, h - 1);
      if (!m.usable(xx, yy)) return false;
    }
  }
  return true;
}

}  // namespace

NormalFlowResult normal_flow(const Frame& prev, const Frame& next, MetricMask prev_mask,
                             MetricMask next_mask) {
  require_same_shape(prev, next, "normal_flow");
  const Frame g_prev = rgb_to_gray(prev);
  const Frame g_next = rgb_to_gray(next);
  const GradientField grad = sobel_gradients(g_next);
  const int w = g_next.width();
  const int h = g_next.height();

  NormalFlowResult out;
  out.magnitudes.assign(g_next.pixel_count(), -1.0f);
  double sum_sq = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!neighbourhood_usable(prev_mask, x, y, w, h) ||
          !neighbourhood_usable(next_mask, x, y, w, h)) {
        continue;
      }
      const double gx = grad.gx.at(x, y);
      const double gy = grad.gy.at(x, y);
      const double g2 = gx * gx + gy * gy;
      if (std::sqrt(g2) < kNormalFlowMinGradient) continue;
      const double dt = static_cast<double>(g_next.at(x, y)) - g_prev.at(x, y);
      // |n| = |dI/dt| |grad I| / |grad I|^2
      const double n = std::abs(dt) / std::sqrt(g2);
      out.magnitudes[static_cast<std::size_t>(y) * w + x] = static_cast<float>(n);
      sum_sq += n * n;
      ++out.qualifying;
    }
  }
  out.any_qualifying = out.qualifying > 0;
  out.rms = out.any_qualifying ? std::sqrt(sum_sq / static_cast<double>(out.qualifying)) : 0.0;
  return out;
}

double delta_i_rms(const Frame& prev, const Frame& next, MetricMask prev_mask,
                   MetricMask next_mask) {
  require_same_shape(prev, next, "delta_i_rms");
  const int nc = next.channels();
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < next.height(); ++y) {
    const float* a = prev.row(y);
    const float* b = next.row(y);
    for (int x = 0; x < next.width(); ++x) {
      if (!prev_mask.usable(x, y) || !next_mask.usable(x, y)) continue;
      for (int c = 0; c < nc; ++c) {
        const double d = static_cast<double>(b[x * nc + c]) - a[x * nc + c];
        sum_sq += d * d;
      }
      n += static_cast<std::size_t>(nc);
    }
  }
  return n > 0 ? std::sqrt(sum_sq / static_cast<double>(n)) : 0.0;
}

double sharpness(const Frame& frame, MetricMask mask) {
  const GradientField grad = sobel_gradients(frame);
  const int nc = frame.channels();
  const int w = frame.width();
  const int h = frame.height();
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!neighbourhood_usable(mask, x, y, w, h)) continue;
      for (int c = 0; c < nc; ++c) {
        const double gx = grad.gx.at(x, y, c);
        const double gy = grad.gy.at(x, y, c);
        sum_sq += gx * gx + gy * gy;
      }
      n += static_cast<std::size_t>(nc);
    }
  }
  return n > 0 ? std::sqrt(sum_sq / static_cast<double>(n)) : 0.0;
}

double angular_velocity_rms(std::span<const RotationMatrix> rotations, double dt) {
  if (rotations.size() < 2) throw DataError("angular_velocity_rms needs at least 2 rotations");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  double sum_sq = 0.0;
  for (std::size_t i = 1; i < rotations.size(); ++i) {
    const double v = geodesic_distance(rotations[i - 1], rotations[i]) / dt * kRadToDeg;
    sum_sq += v * v;
  }
  return std::sqrt(sum_sq / static_cast<double>(rotations.size() - 1));
}

double valid_percentage(const ValidityMask& mask, int required) {
  return 100.0 * mask.fraction_at_least(required);
}

}  // namespace amc
