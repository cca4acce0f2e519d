#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amc/geometry.hpp"
#include "amc/image.hpp"
#include "amc/lk_so3.hpp"
#include "amc/metrics.hpp"
#include "amc/orientation.hpp"
#include "amc/stabilizer.hpp"
#include "amc/view_filter.hpp"

namespace amc {

struct PipelineConfig {
  std::string intrinsics_path;  // empty: use the dataset meta
  std::optional<int> downsample;  // unset: dataset meta hint, else 4
  int n_track = 5;
  int n_avg = 6;
  std::optional<double> filter_a;  // default 2 dt
  std::optional<double> filter_b;  // default 40 dt
  double margin = 0.125;
  StabilizationMode mode = StabilizationMode::kSmooth;
  double saccade_threshold = 0.90;
  std::string output_dir = "amc_out";
  TrackerConfig tracker;
  bool warm_start = true;
  bool compute_metrics = true;
  bool write_frames = true;
  /// Decode/encode PNGs on helper threads through a bounded queue.
  bool overlap_io = false;

  void validate() const;
  ViewFilterParams view_filter(double dt) const;
  StabilizerConfig stabilizer() const;
  OrientationConfig orientation() const;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
/// Fields absent from `j` keep their current values. Throws ConfigError.
void from_json(const nlohmann::json& j, PipelineConfig& c);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Per-frame metric bookkeeping for one output stream.
class MetricsTracker {
 public:
  explicit MetricsTracker(double dt) : dt_(dt) {}

  /// `required` is the count a pixel needs in `mask` to be valid.
  FrameMetrics push(const Frame& frame, const ValidityMask& mask, int required,
                    const RotationMatrix& r_img, const RotationMatrix& r_view);

 private:
  double dt_;
  bool has_prev_ = false;
  Frame prev_;
  ValidityMask prev_mask_;
  int prev_required_ = 1;
  RotationMatrix prev_img_ = RotationMatrix::Identity();
  RotationMatrix prev_view_ = RotationMatrix::Identity();
};

/// Sequence-level aggregate of FrameMetrics rows: means of the per-frame
/// nf/delta-I/sharpness/valid values and RMS of the per-frame angular
/// velocities. Frame 0 has no predecessor and is excluded from the
/// temporal quantities.
struct MetricsSummary {
  double nf_rms = 0.0;
  double delta_i_rms = 0.0;
  double sharpness = 0.0;
  double valid_pct = 0.0;
  double omega_rms_img = 0.0;
  double omega_rms_view = 0.0;
  std::size_t frames = 0;
};

MetricsSummary summarize(const std::vector<FrameMetrics>& rows);
void to_json(nlohmann::json& j, const MetricsSummary& s);

/// Everything the pipeline produces for one input frame.
struct PipelineStep {
  OrientationEstimate estimate;
  RotationMatrix filtered_view = RotationMatrix::Identity();  // low-pass view
  bool view_snapped = false;
  StabilizedFrame stabilized;
  Frame unstabilized;  // input cropped to the output geometry
  FrameMetrics metrics_none;
  FrameMetrics metrics_mode;
};

/// Streaming stabilizer over frames that are already at tracking
/// resolution: orientation -> view filter -> stabilization -> metrics.
/// Output for frame j depends only on frames <= j.
class StabilizationPipeline {
 public:
  StabilizationPipeline(const Intrinsics& k, double dt, const PipelineConfig& config);

  /// `color` is 1- or 3-channel at the tracking resolution.
  PipelineStep process(const Frame& color);

  const Intrinsics& intrinsics() const { return k_; }
  const Intrinsics& output_intrinsics() const { return stabilizer_.output_intrinsics(); }
  std::size_t buffered_frames() const { return stabilizer_.buffered_frames(); }

  /// Milliseconds spent per stage, summed over all frames.
  struct StageTimes {
    double gray = 0.0;
    double track = 0.0;
    double view = 0.0;
    double stabilize = 0.0;
    double metrics = 0.0;
  };
  const StageTimes& stage_times() const { return times_; }

 private:
  Intrinsics k_;
  double dt_;
  PipelineConfig config_;
  OrientationTracker tracker_;
  ViewFilterParams view_params_;
  ViewState view_;
  Stabilizer stabilizer_;
  MetricsTracker metrics_none_;
  MetricsTracker metrics_mode_;
  StageTimes times_;
};

}  // namespace amc
