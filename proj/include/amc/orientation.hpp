#pragma once

#include <optional>
#include <vector>

#include "amc/geometry.hpp"
#include "amc/image.hpp"
#include "amc/lk_so3.hpp"

namespace amc {

struct OrientationConfig {
  int n_track = 5;  // frames per template
  TrackerConfig tracker;
  /// Start each frame from the previous template-to-current estimate. Turning
  /// this off starts from identity (debugging aid).
  bool warm_start = true;

  void validate() const;
};

struct TrackingDiagnostics {
  int iterations = 0;
  double final_loss = 0.0;
  bool converged = true;
  bool tracking_lost = false;   // alignment failed; estimate frozen
  bool template_reset = false;  // this frame became the new template
  bool template_degenerate = false;
  std::vector<double> loss_history;
};

struct OrientationEstimate {
  std::int64_t frame = 0;
  RotationMatrix r_0j = RotationMatrix::Identity();  // cumulative orientation
  RotationMatrix r_0k = RotationMatrix::Identity();  // at the template used for this frame
  RotationMatrix r_kj = RotationMatrix::Identity();  // template to current
  TrackingDiagnostics diagnostics;
};

/// Multi-frame rotation tracking against a periodically reset template.
/// The first frame seeds the template with R_0k = I; afterwards every frame
/// is aligned to the template (warm-started from the previous frame) and the
/// template is replaced by frame j whenever j mod n_track == n_track - 1.
class OrientationTracker {
 public:
  OrientationTracker(const Intrinsics& k, OrientationConfig config = {});

  /// `gray` must be single-channel at the intrinsics' resolution.
  OrientationEstimate process_frame(const Frame& gray);

  std::int64_t frames_processed() const { return next_index_; }
  const RotationMatrix& r_0k() const { return r_0k_; }
  const RotationMatrix& r_kj() const { return r_kj_; }
  bool has_template() const { return tpl_.has_value(); }
  const OrientationConfig& config() const { return config_; }

 private:
  bool reset_template(const Frame& gray);

  Intrinsics k_;
  OrientationConfig config_;
  std::optional<Template> tpl_;
  RotationMatrix r_0k_ = RotationMatrix::Identity();
  RotationMatrix r_kj_ = RotationMatrix::Identity();
  std::int64_t next_index_ = 0;
};

}  // namespace amc
