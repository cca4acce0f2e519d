#include "amc/orientation.hpp"

#include "amc/errors.hpp"

namespace amc {

void OrientationConfig::validate() const {
  if (n_track < 1) throw ConfigError("n_track must be >= 1");
  tracker.validate();
}

OrientationTracker::OrientationTracker(const Intrinsics& k, OrientationConfig config)
    : k_(k), config_(std::move(config)) {
  k_.validate();
  config_.validate();
}

bool OrientationTracker::reset_template(const Frame& gray) {
  try {
    tpl_.emplace(Template::build(gray, k_, config_.tracker));
    return true;
  } catch (const DegenerateTemplateError&) {
    return false;
  }
}

OrientationEstimate OrientationTracker::process_frame(const Frame& gray) {
  if (gray.channels() != 1 || gray.width() != k_.width || gray.height() != k_.height) {
    throw DataError("process_frame expects a gray frame matching the intrinsics");
  }
  OrientationEstimate est;
  est.frame = next_index_++;
  TrackingDiagnostics& diag = est.diagnostics;

  if (!tpl_) {
    // Stream start (or every template so far was degenerate): this frame
    // becomes the reference at the current cumulative orientation.
    diag.template_degenerate = !reset_template(gray);
    r_kj_ = RotationMatrix::Identity();
    est.r_0k = r_0k_;
    est.r_kj = r_kj_;
    est.r_0j = r_0k_;
    return est;
  }

  bool force_reset = false;
  try {
    // The tracker works with R_{j,k} (template pixel -> current pixel); the
    // cumulative bookkeeping uses its transpose.
    const RotationMatrix init =
        config_.warm_start ? RotationMatrix(r_kj_.transpose()) : RotationMatrix::Identity();
    TrackResult res = track(*tpl_, gray, init, config_.tracker);
    const RotationMatrix frozen = r_kj_;
    r_kj_ = res.rotation.transpose();
    diag.iterations = res.iterations;
    diag.final_loss = res.final_loss;
    diag.converged = res.converged;
    diag.loss_history = std::move(res.loss_history);
    if (!res.converged) {
      // Iteration budget exhausted: the estimate is not trusted.
      r_kj_ = frozen;
      diag.tracking_lost = true;
      force_reset = true;
    }
  } catch (const InsufficientOverlapError&) {
    diag.tracking_lost = true;
    diag.converged = false;
    force_reset = true;
  }

  est.r_0k = r_0k_;
  est.r_kj = r_kj_;
  est.r_0j = r_0k_ * r_kj_;

  const int n = config_.n_track;
  if (force_reset || est.frame % n == n - 1) {
    if (reset_template(gray)) {
      r_0k_ = est.r_0j;
      r_kj_ = RotationMatrix::Identity();
      diag.template_reset = true;
    } else {
      diag.template_degenerate = true;
    }
  }
  return est;
}

}  // namespace amc
