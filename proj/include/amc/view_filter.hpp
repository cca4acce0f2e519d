#pragma once

#include "amc/geometry.hpp"

namespace amc {

/// Adaptive gain alpha(|w|) = min(1, a + b |w|).
struct ViewFilterParams {
  double a = 0.0;
  double b = 0.0;
  double dt = 1.0 / 60.0;

  /// a = 2 dt, b = 40 dt.
  static ViewFilterParams from_dt(double dt);

  double gain(double angle) const;
  void validate() const;
};

struct ViewState {
  RotationMatrix r_view = RotationMatrix::Identity();
};

struct ViewUpdate {
  ViewState state;
  double gain = 0.0;
  /// The estimate was too close to antipodal for log(); the view was snapped
  /// onto it instead.
  bool snapped = false;
};

/// One step of the low-pass filter on SO(3):
///   w = log(R_view^T R_0j), R_view <- R_view exp(alpha(|w|) w).
ViewUpdate update_view(const ViewState& state, const RotationMatrix& r_0j,
                       const ViewFilterParams& params);

/// |log(prev^T next)| / dt in degrees per second.
double view_angular_velocity(const RotationMatrix& prev, const RotationMatrix& next, double dt);

}  // namespace amc
