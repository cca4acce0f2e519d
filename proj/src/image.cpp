#include "amc/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "amc/errors.hpp"

namespace amc {

Frame::Frame(int width, int height, int channels, float fill)
    : width_(width),
      height_(height),
      channels_(channels),
      data_(static_cast<std::size_t>(width) * height * channels, fill) {
  if (width < 0 || height < 0 || channels <= 0) throw DataError("invalid frame shape");
}

double ValidityMask::fraction_at_least(int required) const {
  if (counts_.empty()) return 0.0;
  const auto n = std::count_if(counts_.begin(), counts_.end(),
                               [required](std::uint16_t c) { return c >= required; });
  return static_cast<double>(n) / static_cast<double>(counts_.size());
}

GradientField sobel_gradients(const Frame& frame) {
  const int w = frame.width();
  const int h = frame.height();
  const int nc = frame.channels();
  if (w < 3 || h < 3) throw DataError("sobel_gradients needs at least 3x3 pixels");
  GradientField g{Frame(w, h, nc), Frame(w, h, nc)};
  g.gx.timestamp = g.gy.timestamp = frame.timestamp;
  g.gx.index = g.gy.index = frame.index;
  for (int y = 0; y < h; ++y) {
    const float* up = frame.row(std::max(y - 1, 0));
    const float* mid = frame.row(y);
    const float* down = frame.row(std::min(y + 1, h - 1));
    float* gx = g.gx.row(y);
    float* gy = g.gy.row(y);
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0) * nc;
      const int xr = std::min(x + 1, w - 1) * nc;
      const int xc = x * nc;
      for (int c = 0; c < nc; ++c) {
        const double dx = (up[xr + c] - up[xl + c]) + 2.0 * (mid[xr + c] - mid[xl + c]) +
                          (down[xr + c] - down[xl + c]);
        const double dy = (down[xl + c] - up[xl + c]) + 2.0 * (down[xc + c] - up[xc + c]) +
                          (down[xr + c] - up[xr + c]);
        gx[xc + c] = static_cast<float>(dx / 8.0);
        gy[xc + c] = static_cast<float>(dy / 8.0);
      }
    }
  }
  return g;
}

Frame rgb_to_gray(const Frame& frame) {
  if (frame.channels() == 1) return frame;
  if (frame.channels() != 3) throw DataError("rgb_to_gray expects 1 or 3 channels");
  Frame out(frame.width(), frame.height(), 1);
  out.timestamp = frame.timestamp;
  out.index = frame.index;
  const auto src = frame.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = 0.299f * src[3 * i] + 0.587f * src[3 * i + 1] + 0.114f * src[3 * i + 2];
  }
  return out;
}

Frame downsample(const Frame& frame, int factor) {
  if (factor < 1) throw DataError("downsample factor must be >= 1");
  if (frame.width() % factor != 0 || frame.height() % factor != 0) {
    throw DataError("downsample factor " + std::to_string(factor) + " does not divide " +
                    std::to_string(frame.width()) + "x" + std::to_string(frame.height()));
  }
  if (factor == 1) return frame;
  const int w = frame.width() / factor;
  const int h = frame.height() / factor;
  const int nc = frame.channels();
  Frame out(w, h, nc);
  out.timestamp = frame.timestamp;
  out.index = frame.index;
  const double inv_area = 1.0 / (factor * factor);
  std::vector<double> acc(static_cast<std::size_t>(w) * nc);
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int dy = 0; dy < factor; ++dy) {
      const float* src = frame.row(y * factor + dy);
      for (int x = 0; x < w; ++x) {
        for (int dx = 0; dx < factor; ++dx) {
          const float* p = src + static_cast<std::size_t>(x * factor + dx) * nc;
          for (int c = 0; c < nc; ++c) acc[static_cast<std::size_t>(x) * nc + c] += p[c];
        }
      }
    }
    float* dst = out.row(y);
    for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<float>(acc[i] * inv_area);
  }
  return out;
}

namespace {

// Calls fn(x, y, src_pixel) for every destination pixel whose warped ray
// lands in front of the camera. warp_frame and warp_accumulate share this
// arithmetic, so their samples agree bit for bit.
template <typename Fn>
void for_each_warped_pixel(const RotationMatrix& r, const Intrinsics& k_src,
                           const Intrinsics& k_dst, Fn&& fn) {
  const PixelWarp warp(r, k_src, k_dst);
  PixelCoord s;
  for (int y = 0; y < k_dst.height; ++y) {
    const Eigen::Vector3d start = warp.row_start(y);
    for (int x = 0; x < k_dst.width; ++x) {
      if (warp.map(start, x, s)) fn(x, y, s);
    }
  }
}

}  // namespace

std::pair<Frame, ValidityMask> warp_frame(const Frame& src, const RotationMatrix& r,
                                          const Intrinsics& k_src, const Intrinsics& k_dst) {
  Frame out(k_dst.width, k_dst.height, src.channels());
  out.timestamp = src.timestamp;
  out.index = src.index;
  ValidityMask mask(k_dst.width, k_dst.height);
  for_each_warped_pixel(r, k_src, k_dst, [&](int x, int y, const PixelCoord& s) {
    if (bilinear_sample(src, s.x(), s.y(), &out.at(x, y))) mask.at(x, y) = 1;
  });
  return {std::move(out), std::move(mask)};
}

void warp_accumulate(const Frame& src, const RotationMatrix& r, const Intrinsics& k_src,
                     const Intrinsics& k_dst, std::span<double> sum, ValidityMask& counts) {
  const int nc = src.channels();
  if (sum.size() != static_cast<std::size_t>(k_dst.width) * k_dst.height * nc ||
      counts.width() != k_dst.width || counts.height() != k_dst.height) {
    throw DataError("warp_accumulate: accumulator shape mismatch");
  }
  float sample[4];
  for_each_warped_pixel(r, k_src, k_dst, [&](int x, int y, const PixelCoord& s) {
    if (!bilinear_sample(src, s.x(), s.y(), sample)) return;
    double* acc = sum.data() + (static_cast<std::size_t>(y) * k_dst.width + x) * nc;
    for (int c = 0; c < nc; ++c) acc[c] += sample[c];
    ++counts.at(x, y);
  });
}

Margins margins_for(int width, int height, double margin_fraction) {
  if (!(margin_fraction >= 0.0 && margin_fraction < 0.5)) {
    throw ConfigError("margin fraction must be in [0, 0.5)");
  }
  return {static_cast<int>(std::floor(margin_fraction * width)),
          static_cast<int>(std::floor(margin_fraction * height))};
}

std::pair<Frame, ValidityMask> crop_margins(const Frame& frame, const ValidityMask& mask,
                                            double margin_fraction) {
  if (mask.width() != frame.width() || mask.height() != frame.height()) {
    throw DataError("crop_margins: mask shape mismatch");
  }
  const Margins m = margins_for(frame.width(), frame.height(), margin_fraction);
  const int w = frame.width() - 2 * m.left;
  const int h = frame.height() - 2 * m.top;
  Frame out(w, h, frame.channels());
  out.timestamp = frame.timestamp;
  out.index = frame.index;
  ValidityMask out_mask(w, h);
  const int nc = frame.channels();
  for (int y = 0; y < h; ++y) {
    const float* src = frame.row(y + m.top) + static_cast<std::size_t>(m.left) * nc;
    std::copy(src, src + static_cast<std::size_t>(w) * nc, out.row(y));
    for (int x = 0; x < w; ++x) out_mask.at(x, y) = mask.at(x + m.left, y + m.top);
  }
  return {std::move(out), std::move(out_mask)};
}

Frame crop_margins(const Frame& frame, double margin_fraction) {
  return crop_margins(frame, ValidityMask(frame.width(), frame.height(), 1), margin_fraction)
      .first;
}

Frame apply_remap(const Frame& src, const RemapTable& table) {
  if (table.xy.size() != static_cast<std::size_t>(table.width) * table.height * 2) {
    throw DataError("remap table size mismatch");
  }
  Frame out(table.width, table.height, src.channels());
  out.timestamp = src.timestamp;
  out.index = src.index;
  for (int y = 0; y < table.height; ++y) {
    for (int x = 0; x < table.width; ++x) {
      const std::size_t i = 2 * (static_cast<std::size_t>(y) * table.width + x);
      bilinear_sample(src, table.xy[i], table.xy[i + 1], &out.at(x, y));
    }
  }
  return out;
}

}  // namespace amc
