#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amc/geometry.hpp"
#include "amc/image.hpp"
#include "amc/metrics.hpp"
#include "amc/pipeline.hpp"
#include "amc/synthetic.hpp"

namespace amc {

// Dataset directory layout:
//   meta.json          {fps, width, height, intrinsics, [downsample], [frames]}
//   frames/*.png       numbered frames, sorted by name
//   remap.bin          optional undistortion map at full resolution
//   ground_truth.csv   optional, frame,t,wx,wy,wz (R_0j as axis-angle)
//   intrinsics.json    written by `synth`, same content as meta.intrinsics

struct DatasetMeta {
  double fps = 60.0;
  int width = 0;
  int height = 0;
  Intrinsics intrinsics;  // of the undistorted full-resolution frames
  /// Tracking downsample suggested by the producer; PipelineConfig wins.
  std::optional<int> downsample;
  std::size_t frames = 0;  // 0 when unknown

  void validate() const;  // throws ConfigError
};

void to_json(nlohmann::json& j, const DatasetMeta& m);
void from_json(const nlohmann::json& j, DatasetMeta& m);
DatasetMeta load_dataset_meta(const std::filesystem::path& dataset_dir);
void save_dataset_meta(const std::filesystem::path& dataset_dir, const DatasetMeta& meta);

struct RotationRow {
  std::int64_t frame = 0;
  double t = 0.0;
  So3Vector w = So3Vector::Zero();     // log(R_0j)
  So3Vector view = So3Vector::Zero();  // log(R_view), the rendering viewpoint
  bool lost = false;
  bool saccade = false;
};

struct GroundTruthRow {
  std::int64_t frame = 0;
  double t = 0.0;
  So3Vector w = So3Vector::Zero();
};

struct MetricsRow {
  std::int64_t frame = 0;
  std::string mode;  // none | stab | sacc
  FrameMetrics m;
};

/// Fixed "%.9g" number formatting so repeated runs are byte-identical.
void write_rotations_csv(const std::filesystem::path& path, const std::vector<RotationRow>& rows);
std::vector<RotationRow> read_rotations_csv(const std::filesystem::path& path);
void write_ground_truth_csv(const std::filesystem::path& path,
                            const std::vector<GroundTruthRow>& rows);
std::vector<GroundTruthRow> read_ground_truth_csv(const std::filesystem::path& path);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Sequential frame source for a dataset: decode, undistort, downsample.
/// Unreadable or mis-sized frames come back empty with a diagnostic.
class DatasetReader {
 public:
  /// A non-empty `intrinsics_path` replaces the meta intrinsics.
  DatasetReader(const std::filesystem::path& dataset_dir, std::optional<int> downsample,
                const std::string& intrinsics_path = {});

  struct Item {
    std::int64_t index = 0;
    double t = 0.0;
    std::optional<Frame> frame;  // at tracking resolution
    std::string error;
    double read_ms = 0.0;
    double preprocess_ms = 0.0;
  };

  std::size_t size() const { return files_.size(); }
  Item load(std::size_t i) const;

  const DatasetMeta& meta() const { return meta_; }
  /// Intrinsics at tracking resolution.
  const Intrinsics& intrinsics() const { return k_; }
  int downsample() const { return downsample_; }
  double dt() const { return 1.0 / meta_.fps; }

 private:
  std::filesystem::path dir_;
  DatasetMeta meta_;
  std::vector<std::filesystem::path> files_;
  std::vector<std::int64_t> indices_;
  std::optional<RemapTable> remap_;
  int downsample_ = 4;
  Intrinsics k_;
};

struct SynthOptions {
  std::string preset = "flapper12";
  std::filesystem::path trajectory_path;  // overrides preset when set
  SourceKind source = SourceKind::kNoise;
  int source_size = 2048;
  double source_fov_deg = 120.0;
  std::uint64_t seed = 7;
  int width = 320;
  int height = 180;
  double fov_deg = 60.0;
  std::optional<std::size_t> max_frames;
};

struct SynthReport {
  std::size_t frames = 0;
  double fps = 0.0;
};

/// Renders a synthetic dataset. Throws FovExceededError when the trajectory
/// leaves the source.
SynthReport cmd_synth(const SynthOptions& options, const std::filesystem::path& out_dir);

struct ErrorStats {
  double mean_deg = 0.0;
  double median_deg = 0.0;
  double rms_deg = 0.0;
  double max_deg = 0.0;
};

struct TrackReport {
  std::size_t frames = 0;
  std::size_t skipped = 0;
  std::size_t lost = 0;
  double mean_iterations = 0.0;
  std::optional<ErrorStats> error;  // when the dataset has ground truth
  std::vector<RotationRow> rows;
};

/// Orientation and view filter only; writes the rotations CSV.
TrackReport cmd_track(const std::filesystem::path& dataset_dir, const PipelineConfig& config,
                      const std::filesystem::path& rotations_csv);

struct StabilizeReport {
  std::size_t frames = 0;
  std::size_t skipped = 0;
  std::size_t lost = 0;
  std::size_t saccades = 0;
  MetricsSummary none;
  MetricsSummary mode;
  std::string mode_tag;  // stab | sacc
  std::map<std::string, double> stage_ms;  // mean per processed frame
  double compute_fps = 0.0;  // excludes decode, encode and metrics
  double wall_fps = 0.0;
};

void to_json(nlohmann::json& j, const StabilizeReport& r);

/// Full streaming pass. Writes <output_dir>/frames/*.png, rotations.csv,
/// metrics.csv and summary.json.
StabilizeReport cmd_stabilize(const std::filesystem::path& dataset_dir,
                              const PipelineConfig& config);

struct MetricsOptions {
  std::filesystem::path frames_dir;
  /// Supplies omega_img (w columns) and omega_view (view columns).
  std::optional<std::filesystem::path> rotations_csv;
  double fps = 60.0;
  std::string mode_tag = "none";
  std::filesystem::path output_csv = "metrics.csv";
};

/// Metrics over a plain frame directory; every pixel counts as valid.
MetricsSummary cmd_metrics(const MetricsOptions& options);

}  // namespace amc
