#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "amc/geometry.hpp"

namespace amc {

/// Row-major H x W x C float image, values nominally in [0, 1].
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  float& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_ * channels_; }
  const float* row(int y) const {
    return data_.data() + static_cast<std::size_t>(y) * width_ * channels_;
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_shape(const Frame& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  double timestamp = 0.0;
  std::int64_t index = 0;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Per-pixel count of source frames that contributed a valid sample.
class ValidityMask {
 public:
  ValidityMask() = default;
  ValidityMask(int width, int height, std::uint16_t fill = 0)
      : width_(width), height_(height), counts_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint16_t& at(int x, int y) { return counts_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint16_t at(int x, int y) const { return counts_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<std::uint16_t> counts() { return counts_; }
  std::span<const std::uint16_t> counts() const { return counts_; }

  /// Fraction of pixels whose count is at least `required`.
  double fraction_at_least(int required) const;

  bool operator==(const ValidityMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint16_t> counts_;
};

struct GradientField {
  Frame gx;
  Frame gy;
};

/// Bilinear interpolation at continuous pixel (x, y). Writes one value per
/// channel to `out` and returns false (leaving `out` untouched) when any of
/// the four neighbours falls outside [0, W-1] x [0, H-1].
inline bool bilinear_sample(const Frame& frame, double x, double y, float* out) {
  const int w = frame.width();
  const int h = frame.height();
  if (!(x >= 0.0 && y >= 0.0 && x <= w - 1 && y <= h - 1)) return false;
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  if (x0 > w - 2) x0 = w - 2;
  if (y0 > h - 2) y0 = h - 2;
  const float fx = static_cast<float>(x - x0);
  const float fy = static_cast<float>(y - y0);
  const int c = frame.channels();
  const float* p00 = frame.row(y0) + static_cast<std::size_t>(x0) * c;
  const float* p10 = p00 + c;
  const float* p01 = frame.row(y0 + 1) + static_cast<std::size_t>(x0) * c;
  const float* p11 = p01 + c;
  for (int k = 0; k < c; ++k) {
    const float top = p00[k] + fx * (p10[k] - p00[k]);
    const float bottom = p01[k] + fx * (p11[k] - p01[k]);
    out[k] = top + fy * (bottom - top);
  }
  return true;
}

/// 3x3 Sobel with 1/8 normalization (a unit-slope ramp gives 1.0) and
/// replicated borders.
GradientField sobel_gradients(const Frame& frame);

/// Rec.601 luma. Single-channel input is returned unchanged.
Frame rgb_to_gray(const Frame& frame);

/// Block-mean over factor x factor tiles. Throws DataError unless factor
/// divides both dimensions.
Frame downsample(const Frame& frame, int factor);

/// Renders `src` as seen from a camera rotated by `r`: destination pixel p
/// samples src at K_src(rotational_warp(r, K_dst^-1 p)). Invalid samples get
/// value 0 and count 0. Output size is K_dst.width x K_dst.height.
std::pair<Frame, ValidityMask> warp_frame(const Frame& src, const RotationMatrix& r,
                                          const Intrinsics& k_src, const Intrinsics& k_dst);

/// Accumulating form of warp_frame used by the stabilizer: adds valid
/// samples into `sum` (H x W x C doubles) and increments `counts`.
void warp_accumulate(const Frame& src, const RotationMatrix& r, const Intrinsics& k_src,
                     const Intrinsics& k_dst, std::span<double> sum, ValidityMask& counts);

/// Number of pixels removed from each side for a margin fraction.
struct Margins {
  int left = 0;
  int top = 0;
};
Margins margins_for(int width, int height, double margin_fraction);

/// Removes floor(margin * W) columns and floor(margin * H) rows per side.
std::pair<Frame, ValidityMask> crop_margins(const Frame& frame, const ValidityMask& mask,
                                            double margin_fraction);
Frame crop_margins(const Frame& frame, double margin_fraction);

/// Precomputed undistortion map: for every output pixel, the source pixel
/// coordinate to sample.
struct RemapTable {
  int width = 0;
  int height = 0;
  std::vector<float> xy;  // 2 * width * height, interleaved (x, y)
};

Frame apply_remap(const Frame& src, const RemapTable& table);

}  // namespace amc
