#pragma once

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include <cstdint>
#include <vector>

#include "amc/geometry.hpp"
#include "amc/image.hpp"

namespace amc {

struct TrackerConfig {
  int max_iterations = 20;
  double step_tolerance = 1e-5;  // radians
  int max_line_search_halvings = 8;
  double min_valid_fraction = 0.5;
  double max_condition_number = 1e8;

  void validate() const;
};

/// Inverse-compositional alignment state for one template image. Gradients,
/// steepest-descent rows and the Gauss-Newton Hessian are computed once in
/// build() and never change.
class Template {
 public:
  /// Throws DegenerateTemplateError when the Hessian is singular or its
  /// condition number exceeds config.max_condition_number.
  static Template build(const Frame& gray, const Intrinsics& k,
                        const TrackerConfig& config = {});

  const Frame& image() const { return image_; }
  const Intrinsics& intrinsics() const { return intrinsics_; }
  const Eigen::Matrix3d& hessian() const { return hessian_; }
  double condition_number() const { return condition_number_; }

  /// Per-pixel row J_i = grad I(p_i) * d pixel / d omega, row-major order.
  const std::vector<Eigen::Vector3d>& steepest_descent() const { return steepest_descent_; }
  /// Pixels with non-zero steepest-descent rows.
  const std::vector<std::uint32_t>& valid_pixels() const { return valid_pixels_; }

  Eigen::Vector3d solve(const Eigen::Vector3d& b) const { return hessian_ldlt_.solve(b); }

 private:
  Template() = default;

  Frame image_;
  Intrinsics intrinsics_;
  std::vector<Eigen::Vector3d> steepest_descent_;
  std::vector<std::uint32_t> valid_pixels_;
  Eigen::Matrix3d hessian_ = Eigen::Matrix3d::Zero();
  Eigen::LDLT<Eigen::Matrix3d> hessian_ldlt_;
  double condition_number_ = 0.0;
};

/// Photometric error of the template against `current` seen through
/// rotation r (template pixel p compared with current at r p).
struct AlignmentResidual {
  double loss = 0.0;                                       // mean squared error
  Eigen::Vector3d weighted = Eigen::Vector3d::Zero();      // sum_i J_i r_i
  std::size_t valid_count = 0;
  std::size_t total_count = 0;
};

AlignmentResidual evaluate_alignment(const Template& tpl, const Frame& current,
                                     const RotationMatrix& r);

struct GaussNewtonStep {
  So3Vector omega = So3Vector::Zero();  // apply as r <- r * exp(omega)
  double loss = 0.0;
  std::size_t valid_count = 0;
};

/// One inverse-compositional Gauss-Newton step at estimate r. Residuals are
/// r_i = I_k(p_i) - I_j(r p_i) over validly sampled pixels; the Hessian is
/// the fixed template Hessian. Throws InsufficientOverlapError.
GaussNewtonStep gauss_newton_step(const Template& tpl, const Frame& current,
                                  const RotationMatrix& r, const TrackerConfig& config = {});

struct TrackResult {
  /// R_{j,k}: template pixel p corresponds to current pixel rotation * p.
  RotationMatrix rotation = RotationMatrix::Identity();
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Loss at the initial estimate followed by the loss after every accepted
  /// step. Strictly decreasing.
  std::vector<double> loss_history;
};

/// Iterated Gauss-Newton with halving line search. Throws
/// InsufficientOverlapError if the initial estimate does not overlap.
TrackResult track(const Template& tpl, const Frame& current, const RotationMatrix& initial,
                  const TrackerConfig& config = {});

}  // namespace amc
