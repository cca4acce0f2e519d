#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "amc/geometry.hpp"
#include "amc/image.hpp"

namespace amc {

/// Fractal gradient-noise texture parameters.
struct NoiseTextureParams {
  /// Low-detail variant: fewer, weaker high octaves. Gives a wide, smooth
  /// basin of convergence for cold-start alignment.
  static NoiseTextureParams smooth();

  int size = 2048;
  double base_wavelength = 96.0;  // pixels, coarsest octave
  int octaves = 6;
  double persistence = 0.7;       // amplitude ratio between octaves
  double contrast = 0.42;
  double chroma = 0.35;            // color variation relative to luminance
  std::uint64_t seed = 7;
};

Frame make_noise_texture(const NoiseTextureParams& params);

/// Procedural resolution chart: soft-edged checker fields, discs, ring
/// patterns and ramps on a noise background.
Frame make_test_chart(int size, std::uint64_t seed = 11);

/// Wide-angle virtual scene at infinity.
struct SourceImage {
  Frame image;
  Intrinsics k;  // square, centered, `fov_deg` horizontal field of view
};

/// kNoise: detailed fBm texture. kSmooth: NoiseTextureParams::smooth().
enum class SourceKind { kNoise, kSmooth, kChart };

SourceImage make_source(SourceKind kind, int size = 2048, double fov_deg = 120.0,
                        std::uint64_t seed = 7);
SourceKind parse_source_kind(const std::string& name);

/// Renders the view of a camera with orientation `r_world_cam` (camera ray d
/// looks along world ray r_world_cam d). Throws FovExceededError if any
/// camera pixel falls outside the source.
Frame render_view(const SourceImage& source, const RotationMatrix& r_world_cam,
                  const Intrinsics& k_cam);

struct Sinusoid {
  double amplitude = 0.0;  // radians
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // radians
};

struct BaseKeyframe {
  double t = 0.0;
  So3Vector rotation = So3Vector::Zero();  // absolute axis-angle
};

/// Camera orientation over time: a slow base schedule (keyframes joined by
/// smoothstep-eased geodesics) right-multiplied by per-axis sinusoidal shake.
struct ShakeTrajectory {
  std::vector<BaseKeyframe> base;
  std::array<std::vector<Sinusoid>, 3> perturbation;
  double fps = 60.0;
  double duration = 20.0;  // seconds

  std::size_t frame_count() const;
  RotationMatrix base_at(double t) const;
  So3Vector shake_at(double t) const;
  /// Camera-to-world orientation at time t.
  RotationMatrix at(double t) const;

  /// Amplitudes < 0.2 rad, frequencies < fps / 2, positive fps/duration,
  /// keyframes sorted. Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json& j, const ShakeTrajectory& t);
void from_json(const nlohmann::json& j, ShakeTrajectory& t);

/// Named presets: "flapper12" (12 Hz + 24 Hz shake over a slow pan, 20 s),
/// "pan_shake" (the same shake over a fast 52 degree yaw pan, 5 s), "static",
/// "yaw_ramp" (slow constant yaw, no shake).
ShakeTrajectory trajectory_preset(const std::string& name);
std::vector<std::string> trajectory_preset_names();

/// Lazily rendered pure-rotation sequence with exact ground truth.
class SyntheticSequence {
 public:
  SyntheticSequence(SourceImage source, ShakeTrajectory trajectory, Intrinsics k_cam);

  std::size_t size() const { return trajectory_.frame_count(); }
  double dt() const { return 1.0 / trajectory_.fps; }
  const Intrinsics& intrinsics() const { return k_cam_; }
  const ShakeTrajectory& trajectory() const { return trajectory_; }
  const SourceImage& source() const { return source_; }

  Frame frame(std::size_t j) const;
  /// Camera-to-world orientation of frame j.
  RotationMatrix world_rotation(std::size_t j) const;
  /// R_0j relative to the first frame.
  RotationMatrix ground_truth(std::size_t j) const;

 private:
  SourceImage source_;
  ShakeTrajectory trajectory_;
  Intrinsics k_cam_;
  RotationMatrix r_w0_;
};

struct GeneratedSequence {
  std::vector<Frame> frames;
  std::vector<RotationMatrix> ground_truth;  // R_0j
};

/// Renders every frame eagerly. Prefer SyntheticSequence for long runs.
GeneratedSequence generate_sequence(const SourceImage& source, const ShakeTrajectory& trajectory,
                                    const Intrinsics& k_cam);

}  // namespace amc
