#include "amc/lk_so3.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

#include "amc/errors.hpp"

namespace amc {

void TrackerConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(step_tolerance > 0.0)) throw ConfigError("step_tolerance must be > 0");
  if (max_line_search_halvings < 0) throw ConfigError("max_line_search_halvings must be >= 0");
  if (!(min_valid_fraction >= 0.0 && min_valid_fraction <= 1.0)) {
    throw ConfigError("min_valid_fraction must be in [0, 1]");
  }
}

Template Template::build(const Frame& gray, const Intrinsics& k, const TrackerConfig& config) {
  if (gray.channels() != 1) throw DataError("template must be a single-channel frame");
  const GradientField grad = sobel_gradients(gray);

  Template tpl;
  tpl.image_ = gray;
  tpl.intrinsics_ = k;
  tpl.steepest_descent_.resize(gray.pixel_count());

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  std::size_t i = 0;
  for (int y = 0; y < gray.height(); ++y) {
    for (int x = 0; x < gray.width(); ++x, ++i) {
      const NormalizedCoord p = k.pixel_to_normalized(PixelCoord(x, y));
      const WarpJacobian jw = warp_jacobian(p);
      // Chain rule to pixel units: d u / d omega = fx * d x' / d omega.
      const Eigen::Vector3d j =
          (grad.gx.at(x, y) * k.fx) * jw.row(0).transpose() +
          (grad.gy.at(x, y) * k.fy) * jw.row(1).transpose();
      tpl.steepest_descent_[i] = j;
      if (!j.isZero(0.0)) {
        tpl.valid_pixels_.push_back(static_cast<std::uint32_t>(i));
        h.noalias() += j * j.transpose();
      }
    }
  }
  tpl.hessian_ = h;

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(h, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(2);
  if (!(hi > 0.0) || !(lo > 0.0)) {
    throw DegenerateTemplateError("Hessian is singular");
  }
  tpl.condition_number_ = hi / lo;
  if (tpl.condition_number_ > config.max_condition_number) {
    throw DegenerateTemplateError("Hessian condition number " +
                                  std::to_string(tpl.condition_number_));
  }
  tpl.hessian_ldlt_.compute(h);
  return tpl;
}

AlignmentResidual evaluate_alignment(const Template& tpl, const Frame& current,
                                     const RotationMatrix& r) {
  const Frame& base = tpl.image();
  if (current.width() != base.width() || current.height() != base.height() ||
      current.channels() != 1) {
    throw DataError("current frame must be gray and match the template size");
  }
  const Intrinsics& k = tpl.intrinsics();
  const auto& sd = tpl.steepest_descent();

  AlignmentResidual out;
  out.total_count = base.pixel_count();
  double sum_sq = 0.0;
  Eigen::Vector3d weighted = Eigen::Vector3d::Zero();
  std::size_t i = 0;
  float sample = 0.0f;
  const PixelWarp warp(r, k, k);
  PixelCoord s;
  for (int y = 0; y < base.height(); ++y) {
    const float* tpl_row = base.row(y);
    const Eigen::Vector3d start = warp.row_start(y);
    for (int x = 0; x < base.width(); ++x, ++i) {
      if (!warp.map(start, x, s)) continue;
      if (!bilinear_sample(current, s.x(), s.y(), &sample)) continue;
      const double residual = static_cast<double>(tpl_row[x]) - sample;
      sum_sq += residual * residual;
      weighted.noalias() += residual * sd[i];
      ++out.valid_count;
    }
  }
  out.weighted = weighted;
  out.loss = out.valid_count > 0 ? sum_sq / static_cast<double>(out.valid_count)
                                 : std::numeric_limits<double>::infinity();
  return out;
}

namespace {

bool enough_overlap(const AlignmentResidual& e, const TrackerConfig& config) {
  return e.valid_count > 0 &&
         static_cast<double>(e.valid_count) >=
             config.min_valid_fraction * static_cast<double>(e.total_count);
}

}  // namespace

GaussNewtonStep gauss_newton_step(const Template& tpl, const Frame& current,
                                  const RotationMatrix& r, const TrackerConfig& config) {
  const AlignmentResidual e = evaluate_alignment(tpl, current, r);
  if (!enough_overlap(e, config)) throw InsufficientOverlapError(e.valid_count, e.total_count);
  return {tpl.solve(e.weighted), e.loss, e.valid_count};
}

TrackResult track(const Template& tpl, const Frame& current, const RotationMatrix& initial,
                  const TrackerConfig& config) {
  TrackResult result;
  result.rotation = initial;
  AlignmentResidual e = evaluate_alignment(tpl, current, initial);
  if (!enough_overlap(e, config)) throw InsufficientOverlapError(e.valid_count, e.total_count);
  result.loss_history.push_back(e.loss);

  while (result.iterations < config.max_iterations) {
    const So3Vector omega = tpl.solve(e.weighted);
    ++result.iterations;
    if (omega.norm() < config.step_tolerance) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    double beta = 1.0;
    RotationMatrix candidate;
    AlignmentResidual ce;
    for (int halving = 0; halving <= config.max_line_search_halvings; ++halving, beta *= 0.5) {
      candidate = result.rotation * exp_so3(beta * omega);
      ce = evaluate_alignment(tpl, current, candidate);
      if (enough_overlap(ce, config) && ce.loss < e.loss) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No step along omega lowers the loss: the estimate is a local minimum
      // to within the line-search resolution.
      result.converged = true;
      break;
    }
    result.rotation = candidate;
    e = ce;
    result.loss_history.push_back(e.loss);
    if (beta * omega.norm() < config.step_tolerance) {
      result.converged = true;
      break;
    }
  }
  result.final_loss = e.loss;
  return result;
}

}  // namespace amc
