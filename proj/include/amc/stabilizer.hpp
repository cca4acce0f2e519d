#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "amc/geometry.hpp"
#include "amc/image.hpp"

namespace amc {

enum class StabilizationMode { kSmooth, kSaccade };

std::string to_string(StabilizationMode mode);
StabilizationMode parse_mode(const std::string& name);  // "smooth" | "saccade"

struct StabilizerConfig {
  int n_avg = 6;
  double margin_fraction = 0.125;
  StabilizationMode mode = StabilizationMode::kSmooth;
  double saccade_valid_threshold = 0.90;

  void validate() const;
};

/// Intrinsics of the cropped output view.
Intrinsics output_intrinsics(const Intrinsics& k, double margin_fraction);

struct BufferedFrame {
  Frame image;
  RotationMatrix r_0i = RotationMatrix::Identity();     // estimated orientation
  RotationMatrix r_view = RotationMatrix::Identity();   // stable view at frame i
};

/// Fixed-capacity FIFO of the most recent frames, oldest first.
class FrameBuffer {
 public:
  explicit FrameBuffer(std::size_t capacity);

  void push(BufferedFrame frame);
  void clear() { frames_.clear(); }

  std::size_t size() const { return frames_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return frames_.empty(); }
  bool full() const { return frames_.size() == capacity_; }
  const BufferedFrame& operator[](std::size_t i) const { return frames_[i]; }
  const BufferedFrame& back() const { return frames_.back(); }
  auto begin() const { return frames_.begin(); }
  auto end() const { return frames_.end(); }

 private:
  std::size_t capacity_;
  std::deque<BufferedFrame> frames_;
};

struct StabilizedFrame {
  Frame image;
  ValidityMask mask;     // contributing frames per output pixel
  int contributors = 0;  // frames averaged for this output
  /// Fraction of output pixels filled by every averaged frame.
  double valid_fraction = 0.0;
  bool saccaded = false;
  RotationMatrix r_view = RotationMatrix::Identity();  // rendering viewpoint
};

/// Warps every buffered frame i to the newest view with
/// R_stab = R_view[j]^T R_0i and averages per pixel over the frames that
/// sampled validly. Output has the cropped geometry of output_intrinsics().
StabilizedFrame stabilize_smooth(const FrameBuffer& buffer, const Intrinsics& k,
                                 double margin_fraction);

/// Fixed-viewpoint stabilizer with an O(1) running sum: each frame adds its
/// warp and removes the one that left the window. When fewer than
/// `saccade_valid_threshold` of the output pixels are filled by every cached
/// frame, the viewpoint jumps to the current orientation and the sum is
/// rebuilt from the cached raw frames.
class SaccadeStabilizer {
 public:
  SaccadeStabilizer(const Intrinsics& k, const StabilizerConfig& config);

  StabilizedFrame push(const Frame& image, const RotationMatrix& r_0j);

  const RotationMatrix& fixed_view() const { return r_fixed_; }
  const FrameBuffer& raw_frames() const { return raw_; }
  std::size_t saccade_count() const { return saccades_; }
  /// Running per-pixel sum (H x W x C).
  const std::vector<double>& accumulator() const { return sum_; }
  const ValidityMask& counts() const { return counts_; }

 private:
  struct WarpedFrame {
    Frame values;  // zero where invalid
    ValidityMask mask;
  };

  WarpedFrame warp_to_fixed(const Frame& image, const RotationMatrix& r_0i) const;
  void add(const WarpedFrame& w, double sign);
  void rebuild();
  StabilizedFrame output() const;

  Intrinsics k_;
  Intrinsics k_out_;
  StabilizerConfig config_;
  bool initialized_ = false;
  RotationMatrix r_fixed_ = RotationMatrix::Identity();
  FrameBuffer raw_;
  std::deque<WarpedFrame> warped_;
  std::vector<double> sum_;
  ValidityMask counts_;
  std::size_t saccades_ = 0;
};

/// Mode-dispatching front end used by the pipeline.
class Stabilizer {
 public:
  Stabilizer(const Intrinsics& k, const StabilizerConfig& config);

  /// `image` is the color frame at tracking resolution; `r_view` is the
  /// filtered view for this frame (ignored for rendering in saccade mode).
  StabilizedFrame push(const Frame& image, const RotationMatrix& r_0j,
                       const RotationMatrix& r_view);

  const StabilizerConfig& config() const { return config_; }
  const Intrinsics& output_intrinsics() const { return k_out_; }
  /// Frames currently held (bounded by n_avg).
  std::size_t buffered_frames() const;

 private:
  Intrinsics k_;
  Intrinsics k_out_;
  StabilizerConfig config_;
  FrameBuffer buffer_;
  SaccadeStabilizer saccade_;
};

}  // namespace amc
