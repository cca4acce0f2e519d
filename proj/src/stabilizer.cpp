#include "amc/stabilizer.hpp"

#include <algorithm>

#include "amc/errors.hpp"

namespace amc {

std::string to_string(StabilizationMode mode) {
  return mode == StabilizationMode::kSmooth ? "smooth" : "saccade";
}

StabilizationMode parse_mode(const std::string& name) {
  if (name == "smooth") return StabilizationMode::kSmooth;
  if (name == "saccade") return StabilizationMode::kSaccade;
  throw ConfigError("unknown stabilization mode '" + name + "' (expected smooth or saccade)");
}

void StabilizerConfig::validate() const {
  if (n_avg < 1) throw ConfigError("n_avg must be >= 1");
  if (!(margin_fraction >= 0.0 && margin_fraction < 0.5)) {
    throw ConfigError("margin must be in [0, 0.5)");
  }
  if (!(saccade_valid_threshold > 0.0 && saccade_valid_threshold <= 1.0)) {
    throw ConfigError("saccade threshold must be in (0, 1]");
  }
}

Intrinsics output_intrinsics(const Intrinsics& k, double margin_fraction) {
  const Margins m = margins_for(k.width, k.height, margin_fraction);
  return k.cropped(m.left, m.top, k.width - 2 * m.left, k.height - 2 * m.top);
}

FrameBuffer::FrameBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("frame buffer capacity must be >= 1");
}

void FrameBuffer::push(BufferedFrame frame) {
  if (frames_.size() == capacity_) frames_.pop_front();
  frames_.push_back(std::move(frame));
}

namespace {

// Per-pixel mean over contributing frames; pixels without any contribution
// stay zero.
Frame average(const std::vector<double>& sum, const ValidityMask& counts, int channels) {
  Frame out(counts.width(), counts.height(), channels);
  auto data = out.data();
  const auto c = counts.counts();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0) continue;
    const double inv = 1.0 / c[i];
    for (int k = 0; k < channels; ++k) {
      data[i * channels + k] = static_cast<float>(sum[i * channels + k] * inv);
    }
  }
  return out;
}

}  // namespace

StabilizedFrame stabilize_smooth(const FrameBuffer& buffer, const Intrinsics& k,
                                 double margin_fraction) {
  if (buffer.empty()) throw DataError("stabilize_smooth needs a non-empty buffer");
  const Intrinsics k_out = output_intrinsics(k, margin_fraction);
  const int nc = buffer.back().image.channels();
  const RotationMatrix& r_view = buffer.back().r_view;

  std::vector<double> sum(static_cast<std::size_t>(k_out.width) * k_out.height * nc, 0.0);
  ValidityMask counts(k_out.width, k_out.height);
  for (const BufferedFrame& f : buffer) {
    // Output pixel p in the view looks along ray d; frame i sees it at
    // R_0i^T R_view d.
    warp_accumulate(f.image, f.r_0i.transpose() * r_view, k, k_out, sum, counts);
  }

  StabilizedFrame out;
  out.image = average(sum, counts, nc);
  out.image.timestamp = buffer.back().image.timestamp;
  out.image.index = buffer.back().image.index;
  out.contributors = static_cast<int>(buffer.size());
  out.valid_fraction = counts.fraction_at_least(out.contributors);
  out.mask = std::move(counts);
  out.r_view = r_view;
  return out;
}

SaccadeStabilizer::SaccadeStabilizer(const Intrinsics& k, const StabilizerConfig& config)
    : k_(k),
      k_out_(output_intrinsics(k, config.margin_fraction)),
      config_(config),
      raw_(static_cast<std::size_t>(std::max(config.n_avg, 1))),
      counts_(k_out_.width, k_out_.height) {
  config_.validate();
}

SaccadeStabilizer::WarpedFrame SaccadeStabilizer::warp_to_fixed(const Frame& image,
                                                               const RotationMatrix& r_0i) const {
  auto [values, mask] = warp_frame(image, r_0i.transpose() * r_fixed_, k_, k_out_);
  return {std::move(values), std::move(mask)};
}

void SaccadeStabilizer::add(const WarpedFrame& w, double sign) {
  const auto v = w.values.data();
  for (std::size_t i = 0; i < v.size(); ++i) sum_[i] += sign * static_cast<double>(v[i]);
  auto c = counts_.counts();
  const auto m = w.mask.counts();
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = static_cast<std::uint16_t>(sign > 0 ? c[i] + m[i] : c[i] - m[i]);
  }
}

void SaccadeStabilizer::rebuild() {
  std::fill(sum_.begin(), sum_.end(), 0.0);
  std::fill(counts_.counts().begin(), counts_.counts().end(), std::uint16_t{0});
  warped_.clear();
  for (const BufferedFrame& f : raw_) {
    warped_.push_back(warp_to_fixed(f.image, f.r_0i));
    add(warped_.back(), +1.0);
  }
}

StabilizedFrame SaccadeStabilizer::output() const {
  const int nc = raw_.back().image.channels();
  StabilizedFrame out;
  out.image = average(sum_, counts_, nc);
  out.image.timestamp = raw_.back().image.timestamp;
  out.image.index = raw_.back().image.index;
  out.mask = counts_;
  out.contributors = static_cast<int>(warped_.size());
  out.valid_fraction = counts_.fraction_at_least(out.contributors);
  out.r_view = r_fixed_;
  return out;
}

StabilizedFrame SaccadeStabilizer::push(const Frame& image, const RotationMatrix& r_0j) {
  if (image.width() != k_.width || image.height() != k_.height) {
    throw DataError("saccade stabilizer: frame size does not match intrinsics");
  }
  if (!initialized_) {
    r_fixed_ = r_0j;
    sum_.assign(static_cast<std::size_t>(k_out_.width) * k_out_.height * image.channels(), 0.0);
    initialized_ = true;
  }
  if (warped_.size() == raw_.capacity()) {
    add(warped_.front(), -1.0);
    warped_.pop_front();
  }
  raw_.push({image, r_0j, r_fixed_});
  warped_.push_back(warp_to_fixed(image, r_0j));
  add(warped_.back(), +1.0);

  const int fill = static_cast<int>(warped_.size());
  bool saccaded = false;
  if (counts_.fraction_at_least(fill) < config_.saccade_valid_threshold) {
    r_fixed_ = r_0j;
    rebuild();
    ++saccades_;
    saccaded = true;
  }
  StabilizedFrame out = output();
  out.saccaded = saccaded;
  return out;
}

Stabilizer::Stabilizer(const Intrinsics& k, const StabilizerConfig& config)
    : k_(k),
      k_out_(amc::output_intrinsics(k, config.margin_fraction)),
      config_(config),
      buffer_(static_cast<std::size_t>(std::max(config.n_avg, 1))),
      saccade_(k, config) {
  config_.validate();
}

StabilizedFrame Stabilizer::push(const Frame& image, const RotationMatrix& r_0j,
                                 const RotationMatrix& r_view) {
  if (config_.mode == StabilizationMode::kSaccade) return saccade_.push(image, r_0j);
  buffer_.push({image, r_0j, r_view});
  return stabilize_smooth(buffer_, k_, config_.margin_fraction);
}

std::size_t Stabilizer::buffered_frames() const {
  return config_.mode == StabilizationMode::kSaccade ? saccade_.raw_frames().size()
                                                     : buffer_.size();
}

}  // namespace amc
