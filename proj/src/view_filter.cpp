#include "amc/view_filter.hpp"

#include <algorithm>
#include <cmath>

#include "amc/errors.hpp"

namespace amc {

ViewFilterParams ViewFilterParams::from_dt(double dt) { return {2.0 * dt, 40.0 * dt, dt}; }

double ViewFilterParams::gain(double angle) const { return std::min(1.0, a + b * angle); }

void ViewFilterParams::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0)) throw ConfigError("view filter needs a >= 0 and b >= 0");
  if (!(dt > 0.0)) throw ConfigError("view filter needs dt > 0");
}

ViewUpdate update_view(const ViewState& state, const RotationMatrix& r_0j,
                       const ViewFilterParams& params) {
  ViewUpdate out;
  So3Vector w;
  try {
    w = log_so3(state.r_view.transpose() * r_0j);
  } catch (const NearAntipodalError&) {
    out.state.r_view = r_0j;
    out.gain = 1.0;
    out.snapped = true;
    return out;
  }
  const double angle = w.norm();
  out.gain = params.gain(angle);
  if (angle == 0.0) {
    out.state = state;
  } else if (out.gain >= 1.0) {
    out.state.r_view = r_0j;
  } else {
    out.state.r_view = state.r_view * exp_so3(out.gain * w);
  }
  return out;
}

double view_angular_velocity(const RotationMatrix& prev, const RotationMatrix& next, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  return geodesic_distance(prev, next) / dt * kRadToDeg;
}

}  // namespace amc
