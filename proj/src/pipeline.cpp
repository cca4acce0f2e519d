#include "amc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "amc/errors.hpp"

namespace amc {

void PipelineConfig::validate() const {
  if (downsample && *downsample < 1) throw ConfigError("downsample must be >= 1");
  if (filter_a && !(*filter_a >= 0.0)) throw ConfigError("filter a must be >= 0");
  if (filter_b && !(*filter_b >= 0.0)) throw ConfigError("filter b must be >= 0");
  orientation().validate();
  stabilizer().validate();
}

ViewFilterParams PipelineConfig::view_filter(double dt) const {
  ViewFilterParams p = ViewFilterParams::from_dt(dt);
  if (filter_a) p.a = *filter_a;
  if (filter_b) p.b = *filter_b;
  p.validate();
  return p;
}

StabilizerConfig PipelineConfig::stabilizer() const {
  StabilizerConfig s;
  s.n_avg = n_avg;
  s.margin_fraction = margin;
  s.mode = mode;
  s.saccade_valid_threshold = saccade_threshold;
  return s;
}

OrientationConfig PipelineConfig::orientation() const {
  OrientationConfig o;
  o.n_track = n_track;
  o.tracker = tracker;
  o.warm_start = warm_start;
  return o;
}

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = nlohmann::json{{"intrinsics", c.intrinsics_path},
                     {"n_track", c.n_track},
                     {"n_avg", c.n_avg},
                     {"margin", c.margin},
                     {"mode", to_string(c.mode)},
                     {"saccade_threshold", c.saccade_threshold},
                     {"output_dir", c.output_dir},
                     {"warm_start", c.warm_start},
                     {"compute_metrics", c.compute_metrics},
                     {"write_frames", c.write_frames},
                     {"overlap_io", c.overlap_io},
                     {"tracker",
                      {{"max_iterations", c.tracker.max_iterations},
                       {"step_tolerance", c.tracker.step_tolerance},
                       {"max_line_search_halvings", c.tracker.max_line_search_halvings},
                       {"min_valid_fraction", c.tracker.min_valid_fraction}}}};
  j["downsample"] = c.downsample ? nlohmann::json(*c.downsample) : nlohmann::json(nullptr);
  j["filter_a"] = c.filter_a ? nlohmann::json(*c.filter_a) : nlohmann::json(nullptr);
  j["filter_b"] = c.filter_b ? nlohmann::json(*c.filter_b) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  static const std::vector<std::string> known = {
      "intrinsics", "downsample",  "n_track",    "n_avg",           "filter_a",
      "filter_b",   "margin",      "mode",       "saccade_threshold", "output_dir",
      "warm_start", "compute_metrics", "write_frames", "overlap_io", "tracker"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  try {
    c.intrinsics_path = j.value("intrinsics", c.intrinsics_path);
    if (j.contains("downsample") && !j["downsample"].is_null()) {
      c.downsample = j["downsample"].get<int>();
    }
    c.n_track = j.value("n_track", c.n_track);
    c.n_avg = j.value("n_avg", c.n_avg);
    if (j.contains("filter_a") && !j["filter_a"].is_null()) c.filter_a = j["filter_a"].get<double>();
    if (j.contains("filter_b") && !j["filter_b"].is_null()) c.filter_b = j["filter_b"].get<double>();
    c.margin = j.value("margin", c.margin);
    if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
    c.saccade_threshold = j.value("saccade_threshold", c.saccade_threshold);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.warm_start = j.value("warm_start", c.warm_start);
    c.compute_metrics = j.value("compute_metrics", c.compute_metrics);
    c.write_frames = j.value("write_frames", c.write_frames);
    c.overlap_io = j.value("overlap_io", c.overlap_io);
    if (j.contains("tracker")) {
      const auto& t = j["tracker"];
      c.tracker.max_iterations = t.value("max_iterations", c.tracker.max_iterations);
      c.tracker.step_tolerance = t.value("step_tolerance", c.tracker.step_tolerance);
      c.tracker.max_line_search_halvings =
          t.value("max_line_search_halvings", c.tracker.max_line_search_halvings);
      c.tracker.min_valid_fraction = t.value("min_valid_fraction", c.tracker.min_valid_fraction);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad pipeline config: ") + e.what());
  }
  c.validate();
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  PipelineConfig c;
  from_json(j, c);
  return c;
}

FrameMetrics MetricsTracker::push(const Frame& frame, const ValidityMask& mask, int required,
                                  const RotationMatrix& r_img, const RotationMatrix& r_view) {
  FrameMetrics m;
  const MetricMask cur{&mask, required};
  m.sharpness = sharpness(frame, cur);
  m.valid_pct = valid_percentage(mask, required);
  if (has_prev_) {
    const MetricMask prev{&prev_mask_, prev_required_};
    m.nf_rms = normal_flow(prev_, frame, prev, cur).rms;
    m.delta_i_rms = delta_i_rms(prev_, frame, prev, cur);
    m.omega_img = geodesic_distance(prev_img_, r_img) / dt_ * kRadToDeg;
    m.omega_view = geodesic_distance(prev_view_, r_view) / dt_ * kRadToDeg;
  }
  prev_ = frame;
  prev_mask_ = mask;
  prev_required_ = required;
  prev_img_ = r_img;
  prev_view_ = r_view;
  has_prev_ = true;
  return m;
}

MetricsSummary summarize(const std::vector<FrameMetrics>& rows) {
  MetricsSummary s;
  s.frames = rows.size();
  if (rows.empty()) return s;
  double img_sq = 0.0;
  double view_sq = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.sharpness += rows[i].sharpness;
    s.valid_pct += rows[i].valid_pct;
    if (i == 0) continue;
    s.nf_rms += rows[i].nf_rms;
    s.delta_i_rms += rows[i].delta_i_rms;
    img_sq += rows[i].omega_img * rows[i].omega_img;
    view_sq += rows[i].omega_view * rows[i].omega_view;
  }
  const double n = static_cast<double>(rows.size());
  s.sharpness /= n;
  s.valid_pct /= n;
  if (rows.size() > 1) {
    const double m = n - 1.0;
    s.nf_rms /= m;
    s.delta_i_rms /= m;
    s.omega_rms_img = std::sqrt(img_sq / m);
    s.omega_rms_view = std::sqrt(view_sq / m);
  }
  return s;
}

void to_json(nlohmann::json& j, const MetricsSummary& s) {
  j = nlohmann::json{{"nf_rms", s.nf_rms},
                     {"delta_i_rms", s.delta_i_rms},
                     {"sharpness", s.sharpness},
                     {"valid_pct", s.valid_pct},
                     {"omega_rms_img", s.omega_rms_img},
                     {"omega_rms_view", s.omega_rms_view},
                     {"frames", s.frames}};
}

namespace {

class StageTimer {
 public:
  explicit StageTimer(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    sink_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
                 .count();
  }

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

StabilizationPipeline::StabilizationPipeline(const Intrinsics& k, double dt,
                                             const PipelineConfig& config)
    : k_(k),
      dt_(dt),
      config_(config),
      tracker_(k, config.orientation()),
      view_params_(config.view_filter(dt)),
      stabilizer_(k, config.stabilizer()),
      metrics_none_(dt),
      metrics_mode_(dt) {
  config_.validate();
}

PipelineStep StabilizationPipeline::process(const Frame& color) {
  PipelineStep step;
  Frame gray;
  {
    StageTimer t(times_.gray);
    gray = rgb_to_gray(color);
  }
  {
    StageTimer t(times_.track);
    step.estimate = tracker_.process_frame(gray);
  }
  {
    StageTimer t(times_.view);
    const ViewUpdate u = update_view(view_, step.estimate.r_0j, view_params_);
    view_ = u.state;
    step.filtered_view = view_.r_view;
    step.view_snapped = u.snapped;
  }
  {
    StageTimer t(times_.stabilize);
    step.stabilized = stabilizer_.push(color, step.estimate.r_0j, view_.r_view);
    step.unstabilized = crop_margins(color, config_.margin);
  }
  if (config_.compute_metrics) {
    StageTimer t(times_.metrics);
    const ValidityMask full(step.unstabilized.width(), step.unstabilized.height(), 1);
    step.metrics_none = metrics_none_.push(step.unstabilized, full, 1, step.estimate.r_0j,
                                           step.estimate.r_0j);
    step.metrics_mode =
        metrics_mode_.push(step.stabilized.image, step.stabilized.mask,
                           step.stabilized.contributors, step.estimate.r_0j, step.stabilized.r_view);
  }
  return step;
}

}  // namespace amc
