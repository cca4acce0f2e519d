#include "amc/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "amc/errors.hpp"
#include "amc/io.hpp"
#include "amc/orientation.hpp"
#include "amc/view_filter.hpp"

namespace amc {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad number '" + s + "' in " + path.string());
  }
}

std::int64_t parse_int(const std::string& s, const fs::path& path) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("bad integer '" + s + "' in " + path.string());
  }
  return v;
}

// Reads a CSV with the given header; returns the data rows split into cells.
std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw DataError(path.string() + ": expected header '" + header + "'");
  }
  const std::size_t columns = split_csv_line(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != columns) throw DataError(path.string() + ": wrong column count");
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

// Frame number from a file stem such as "000123"; falls back to `fallback`.
std::int64_t frame_number(const fs::path& file, std::int64_t fallback) {
  const std::string stem = file.stem().string();
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), v);
  return ec == std::errc() && ptr == stem.data() + stem.size() ? v : fallback;
}

fs::path frame_path(const fs::path& dir, std::int64_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "%06lld.png", static_cast<long long>(index));
  return dir / name;
}

// Blocking single-producer single-consumer hand-off with a fixed capacity.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

  void push(T value) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(value));
    not_empty_.notify_one();
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
  }

  // Empty once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return v;
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mutex_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
};

ErrorStats error_stats(std::vector<double> errors_deg) {
  ErrorStats s;
  if (errors_deg.empty()) return s;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double e : errors_deg) {
    sum += e;
    sum_sq += e * e;
    s.max_deg = std::max(s.max_deg, e);
  }
  const double n = static_cast<double>(errors_deg.size());
  s.mean_deg = sum / n;
  s.rms_deg = std::sqrt(sum_sq / n);
  std::sort(errors_deg.begin(), errors_deg.end());
  const std::size_t mid = errors_deg.size() / 2;
  s.median_deg = errors_deg.size() % 2 ? errors_deg[mid]
                                       : 0.5 * (errors_deg[mid - 1] + errors_deg[mid]);
  return s;
}

}  // namespace

void DatasetMeta::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ConfigError("dataset fps must be positive");
  if (width <= 0 || height <= 0) throw ConfigError("dataset width and height must be positive");
  intrinsics.validate();
  if (downsample && *downsample < 1) throw ConfigError("dataset downsample must be >= 1");
}

void to_json(nlohmann::json& j, const DatasetMeta& m) {
  j = nlohmann::json{{"fps", m.fps},
                     {"width", m.width},
                     {"height", m.height},
                     {"intrinsics", m.intrinsics},
                     {"frames", m.frames}};
  if (m.downsample) j["downsample"] = *m.downsample;
}

void from_json(const nlohmann::json& j, DatasetMeta& m) {
  try {
    m.fps = j.at("fps").get<double>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.intrinsics = j.at("intrinsics").get<Intrinsics>();
    m.frames = j.value("frames", std::size_t{0});
    if (j.contains("downsample") && !j["downsample"].is_null()) {
      m.downsample = j["downsample"].get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad dataset meta: ") + e.what());
  }
  if (m.intrinsics.width == 0) m.intrinsics.width = m.width;
  if (m.intrinsics.height == 0) m.intrinsics.height = m.height;
  m.validate();
}

DatasetMeta load_dataset_meta(const fs::path& dataset_dir) {
  const fs::path path = dataset_dir / "meta.json";
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse " + path.string() + ": " + e.what());
  }
  return j.get<DatasetMeta>();
}

void save_dataset_meta(const fs::path& dataset_dir, const DatasetMeta& meta) {
  write_json(dataset_dir / "meta.json", meta);
}

void write_rotations_csv(const fs::path& path, const std::vector<RotationRow>& rows) {
  std::ofstream out = open_output(path);
  out << "frame,t,wx,wy,wz,view_wx,view_wy,view_wz,lost,saccade\n";
  for (const auto& r : rows) {
    out << r.frame << ',' << fmt(r.t) << ',' << fmt(r.w.x()) << ',' << fmt(r.w.y()) << ','
        << fmt(r.w.z()) << ',' << fmt(r.view.x()) << ',' << fmt(r.view.y()) << ','
        << fmt(r.view.z()) << ',' << (r.lost ? 1 : 0) << ',' << (r.saccade ? 1 : 0) << '\n';
  }
}

std::vector<RotationRow> read_rotations_csv(const fs::path& path) {
  std::vector<RotationRow> rows;
  for (const auto& c :
       read_csv(path, "frame,t,wx,wy,wz,view_wx,view_wy,view_wz,lost,saccade")) {
    RotationRow r;
    r.frame = parse_int(c[0], path);
    r.t = parse_double(c[1], path);
    r.w = {parse_double(c[2], path), parse_double(c[3], path), parse_double(c[4], path)};
    r.view = {parse_double(c[5], path), parse_double(c[6], path), parse_double(c[7], path)};
    r.lost = parse_int(c[8], path) != 0;
    r.saccade = parse_int(c[9], path) != 0;
    rows.push_back(r);
  }
  return rows;
}

void write_ground_truth_csv(const fs::path& path, const std::vector<GroundTruthRow>& rows) {
  std::ofstream out = open_output(path);
  out << "frame,t,wx,wy,wz\n";
  for (const auto& r : rows) {
    out << r.frame << ',' << fmt(r.t) << ',' << fmt(r.w.x()) << ',' << fmt(r.w.y()) << ','
        << fmt(r.w.z()) << '\n';
  }
}

std::vector<GroundTruthRow> read_ground_truth_csv(const fs::path& path) {
  std::vector<GroundTruthRow> rows;
  for (const auto& c : read_csv(path, "frame,t,wx,wy,wz")) {
    rows.push_back({parse_int(c[0], path), parse_double(c[1], path),
                    So3Vector(parse_double(c[2], path), parse_double(c[3], path),
                              parse_double(c[4], path))});
  }
  return rows;
}

namespace {
constexpr const char* kMetricsHeader =
    "frame,mode,nf_rms,delta_i_rms,sharpness,valid_pct,omega_img,omega_view";
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out = open_output(path);
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.frame << ',' << r.mode << ',' << fmt(r.m.nf_rms) << ',' << fmt(r.m.delta_i_rms)
        << ',' << fmt(r.m.sharpness) << ',' << fmt(r.m.valid_pct) << ',' << fmt(r.m.omega_img)
        << ',' << fmt(r.m.omega_view) << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(const fs::path& path) {
  std::vector<MetricsRow> rows;
  for (const auto& c : read_csv(path, kMetricsHeader)) {
    MetricsRow r;
    r.frame = parse_int(c[0], path);
    r.mode = c[1];
    r.m.nf_rms = parse_double(c[2], path);
    r.m.delta_i_rms = parse_double(c[3], path);
    r.m.sharpness = parse_double(c[4], path);
    r.m.valid_pct = parse_double(c[5], path);
    r.m.omega_img = parse_double(c[6], path);
    r.m.omega_view = parse_double(c[7], path);
    rows.push_back(r);
  }
  return rows;
}

DatasetReader::DatasetReader(const fs::path& dataset_dir, std::optional<int> downsample,
                             const std::string& intrinsics_path)
    : dir_(dataset_dir), meta_(load_dataset_meta(dataset_dir)) {
  if (!intrinsics_path.empty()) meta_.intrinsics = load_intrinsics(intrinsics_path);
  const fs::path frames_dir = dir_ / "frames";
  if (!fs::is_directory(frames_dir)) throw DataError("missing " + frames_dir.string());
  files_ = list_png_files(frames_dir);
  if (files_.empty()) throw DataError("no PNG frames in " + frames_dir.string());
  for (std::size_t i = 0; i < files_.size(); ++i) {
    indices_.push_back(frame_number(files_[i], static_cast<std::int64_t>(i)));
  }
  if (fs::exists(dir_ / "remap.bin")) {
    remap_ = read_remap(dir_ / "remap.bin");
    if (remap_->width != meta_.width || remap_->height != meta_.height) {
      throw DataError("remap size does not match the dataset meta");
    }
  }
  downsample_ = downsample.value_or(meta_.downsample.value_or(4));
  if (downsample_ < 1) throw ConfigError("downsample must be >= 1");
  if (meta_.width % downsample_ != 0 || meta_.height % downsample_ != 0) {
    throw ConfigError("downsample " + std::to_string(downsample_) +
                      " does not divide the frame size");
  }
  Intrinsics k = meta_.intrinsics;
  k.width = meta_.width;
  k.height = meta_.height;
  k_ = k.downsampled(downsample_);
}

DatasetReader::Item DatasetReader::load(std::size_t i) const {
  Item item;
  item.index = indices_.at(i);
  item.t = static_cast<double>(item.index) / meta_.fps;
  try {
    auto start = Clock::now();
    Frame f = read_png(files_[i]);
    item.read_ms = ms_since(start);
    start = Clock::now();
    if (remap_) f = apply_remap(f, *remap_);
    if (f.width() != meta_.width || f.height() != meta_.height) {
      throw DataError("frame is " + std::to_string(f.width()) + "x" + std::to_string(f.height()) +
                      ", meta says " + std::to_string(meta_.width) + "x" +
                      std::to_string(meta_.height));
    }
    if (downsample_ > 1) f = amc::downsample(f, downsample_);
    item.preprocess_ms = ms_since(start);
    f.index = item.index;
    f.timestamp = item.t;
    item.frame = std::move(f);
  } catch (const DataError& e) {
    item.error = files_[i].string() + ": " + e.what();
  }
  return item;
}

SynthReport cmd_synth(const SynthOptions& options, const fs::path& out_dir) {
  ShakeTrajectory traj;
  if (options.trajectory_path.empty()) {
    traj = trajectory_preset(options.preset);
  } else {
    std::ifstream in(options.trajectory_path);
    if (!in) throw ConfigError("cannot open trajectory " + options.trajectory_path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot parse " + options.trajectory_path.string() + ": " + e.what());
    }
    traj = j.get<ShakeTrajectory>();
  }
  const Intrinsics k = intrinsics_from_fov(options.width, options.height, options.fov_deg);
  k.validate();
  SyntheticSequence seq(make_source(options.source, options.source_size, options.source_fov_deg,
                                    options.seed),
                        traj, k);
  std::size_t n = seq.size();
  if (options.max_frames) n = std::min(n, *options.max_frames);

  const fs::path frames_dir = out_dir / "frames";
  fs::create_directories(frames_dir);
  std::vector<GroundTruthRow> gt;
  gt.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    write_png(frame_path(frames_dir, static_cast<std::int64_t>(j)), seq.frame(j));
    gt.push_back({static_cast<std::int64_t>(j), static_cast<double>(j) * seq.dt(),
                  log_so3(seq.ground_truth(j))});
  }
  DatasetMeta meta;
  meta.fps = traj.fps;
  meta.width = options.width;
  meta.height = options.height;
  meta.intrinsics = k;
  meta.downsample = 1;
  meta.frames = n;
  save_dataset_meta(out_dir, meta);
  write_json(out_dir / "intrinsics.json", k);
  write_json(out_dir / "trajectory.json", traj);
  write_ground_truth_csv(out_dir / "ground_truth.csv", gt);
  return {n, traj.fps};
}

TrackReport cmd_track(const fs::path& dataset_dir, const PipelineConfig& config,
                      const fs::path& rotations_csv) {
  config.validate();
  const DatasetReader reader(dataset_dir, config.downsample, config.intrinsics_path);
  OrientationTracker tracker(reader.intrinsics(), config.orientation());
  const ViewFilterParams view_params = config.view_filter(reader.dt());
  ViewState view;

  std::optional<std::vector<GroundTruthRow>> gt;
  if (fs::exists(dataset_dir / "ground_truth.csv")) {
    gt = read_ground_truth_csv(dataset_dir / "ground_truth.csv");
  }

  TrackReport report;
  std::vector<double> errors;
  std::size_t iterations = 0;
  std::size_t tracked = 0;
  RotationRow last;
  for (std::size_t i = 0; i < reader.size(); ++i) {
    const DatasetReader::Item item = reader.load(i);
    if (!item.frame) {
      std::cerr << "warning: skipping " << item.error << '\n';
      ++report.skipped;
      last.frame = item.index;
      last.t = item.t;
      last.lost = true;
      last.saccade = false;
      report.rows.push_back(last);
      continue;
    }
    const OrientationEstimate est = tracker.process_frame(rgb_to_gray(*item.frame));
    view = update_view(view, est.r_0j, view_params).state;
    if (est.diagnostics.tracking_lost) ++report.lost;
    if (est.frame > 0) {
      iterations += static_cast<std::size_t>(est.diagnostics.iterations);
      ++tracked;
    }
    last = {item.index, item.t, log_so3(est.r_0j), log_so3(view.r_view),
            est.diagnostics.tracking_lost, false};
    report.rows.push_back(last);
    if (gt) {
      const auto it = std::find_if(gt->begin(), gt->end(),
                                   [&](const GroundTruthRow& g) { return g.frame == item.index; });
      if (it != gt->end()) {
        errors.push_back(geodesic_distance(est.r_0j, exp_so3(it->w)) * kRadToDeg);
      }
    }
    ++report.frames;
  }
  report.mean_iterations = tracked ? static_cast<double>(iterations) / tracked : 0.0;
  if (gt) report.error = error_stats(errors);
  write_rotations_csv(rotations_csv, report.rows);
  return report;
}

void to_json(nlohmann::json& j, const StabilizeReport& r) {
  j = nlohmann::json{{"frames", r.frames},
                     {"skipped", r.skipped},
                     {"tracking_lost", r.lost},
                     {"saccades", r.saccades},
                     {"mode", r.mode_tag},
                     {"metrics", {{"none", r.none}, {r.mode_tag, r.mode}}},
                     {"stage_ms", r.stage_ms},
                     {"compute_fps", r.compute_fps},
                     {"effective_fps", r.wall_fps}};
}

StabilizeReport cmd_stabilize(const fs::path& dataset_dir, const PipelineConfig& config) {
  config.validate();
  const DatasetReader reader(dataset_dir, config.downsample, config.intrinsics_path);
  const fs::path out_dir = config.output_dir;
  const fs::path frames_out = out_dir / "frames";
  if (config.write_frames) fs::create_directories(frames_out);
  fs::create_directories(out_dir);

  StabilizationPipeline pipe(reader.intrinsics(), reader.dt(), config);
  StabilizeReport report;
  report.mode_tag = config.mode == StabilizationMode::kSmooth ? "stab" : "sacc";
  std::vector<RotationRow> rotations;
  std::vector<MetricsRow> metric_rows;
  std::vector<FrameMetrics> none_rows;
  std::vector<FrameMetrics> mode_rows;
  double read_ms = 0.0;
  double preprocess_ms = 0.0;
  double write_ms = 0.0;
  RotationRow last;

  struct Output {
    fs::path path;
    Frame image;
  };
  std::optional<BoundedQueue<Output>> write_queue;
  std::thread writer;
  std::exception_ptr write_error;
  if (config.overlap_io && config.write_frames) {
    write_queue.emplace(static_cast<std::size_t>(config.n_avg));
    writer = std::thread([&] {
      while (auto out = write_queue->pop()) {
        if (write_error) continue;
        try {
          const auto start = Clock::now();
          write_png(out->path, out->image);
          write_ms += ms_since(start);
        } catch (...) {
          write_error = std::current_exception();
        }
      }
    });
  }

  auto handle = [&](DatasetReader::Item item) {
    read_ms += item.read_ms;
    preprocess_ms += item.preprocess_ms;
    if (!item.frame) {
      std::cerr << "warning: skipping " << item.error << '\n';
      ++report.skipped;
      last.frame = item.index;
      last.t = item.t;
      last.lost = true;
      last.saccade = false;
      rotations.push_back(last);
      return;
    }
    PipelineStep step = pipe.process(*item.frame);
    if (step.estimate.diagnostics.tracking_lost) ++report.lost;
    if (step.stabilized.saccaded) ++report.saccades;
    last = {item.index,
            item.t,
            log_so3(step.estimate.r_0j),
            log_so3(step.stabilized.r_view),
            step.estimate.diagnostics.tracking_lost,
            step.stabilized.saccaded};
    rotations.push_back(last);
    if (config.compute_metrics) {
      metric_rows.push_back({item.index, "none", step.metrics_none});
      metric_rows.push_back({item.index, report.mode_tag, step.metrics_mode});
      none_rows.push_back(step.metrics_none);
      mode_rows.push_back(step.metrics_mode);
    }
    if (config.write_frames) {
      Output out{frame_path(frames_out, item.index), std::move(step.stabilized.image)};
      if (write_queue) {
        write_queue->push(std::move(out));
      } else {
        const auto start = Clock::now();
        write_png(out.path, out.image);
        write_ms += ms_since(start);
      }
    }
    ++report.frames;
  };

  const auto wall_start = Clock::now();
  if (config.overlap_io) {
    BoundedQueue<DatasetReader::Item> read_queue(static_cast<std::size_t>(config.n_avg));
    std::thread decoder([&] {
      for (std::size_t i = 0; i < reader.size(); ++i) read_queue.push(reader.load(i));
      read_queue.close();
    });
    try {
      while (auto item = read_queue.pop()) handle(std::move(*item));
    } catch (...) {
      // Drain so the decoder can finish before unwinding.
      while (read_queue.pop()) {
      }
      decoder.join();
      if (write_queue) {
        write_queue->close();
        writer.join();
      }
      throw;
    }
    decoder.join();
  } else {
    for (std::size_t i = 0; i < reader.size(); ++i) handle(reader.load(i));
  }
  if (write_queue) {
    write_queue->close();
    writer.join();
    if (write_error) std::rethrow_exception(write_error);
  }
  const double wall_s = ms_since(wall_start) / 1000.0;

  const auto& st = pipe.stage_times();
  const double n = std::max<double>(1.0, static_cast<double>(report.frames));
  report.stage_ms = {{"read", read_ms / n},       {"preprocess", preprocess_ms / n},
                     {"gray", st.gray / n},       {"track", st.track / n},
                     {"view", st.view / n},       {"stabilize", st.stabilize / n},
                     {"metrics", st.metrics / n}, {"write", write_ms / n}};
  const double compute_ms = st.gray + st.track + st.view + st.stabilize;
  report.compute_fps = compute_ms > 0.0 ? 1000.0 * report.frames / compute_ms : 0.0;
  report.wall_fps = wall_s > 0.0 ? report.frames / wall_s : 0.0;
  if (config.compute_metrics) {
    report.none = summarize(none_rows);
    report.mode = summarize(mode_rows);
    write_metrics_csv(out_dir / "metrics.csv", metric_rows);
  }
  write_rotations_csv(out_dir / "rotations.csv", rotations);
  nlohmann::json summary = report;
  summary["config"] = config;
  write_json(out_dir / "summary.json", summary);
  return report;
}

MetricsSummary cmd_metrics(const MetricsOptions& options) {
  if (!(options.fps > 0.0)) throw ConfigError("fps must be positive");
  const auto files = list_png_files(options.frames_dir);
  if (files.empty()) throw DataError("no PNG frames in " + options.frames_dir.string());
  std::vector<RotationRow> rot;
  if (options.rotations_csv) {
    rot = read_rotations_csv(*options.rotations_csv);
    if (rot.size() < files.size()) {
      throw DataError("rotations CSV has fewer rows than there are frames");
    }
  }
  MetricsTracker tracker(1.0 / options.fps);
  std::vector<MetricsRow> rows;
  std::vector<FrameMetrics> values;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const Frame f = read_png(files[i]);
    const ValidityMask full(f.width(), f.height(), 1);
    const RotationMatrix r_img = rot.empty() ? RotationMatrix::Identity() : exp_so3(rot[i].w);
    const RotationMatrix r_view =
        rot.empty() ? RotationMatrix::Identity() : exp_so3(rot[i].view);
    const FrameMetrics m = tracker.push(f, full, 1, r_img, r_view);
    rows.push_back({frame_number(files[i], static_cast<std::int64_t>(i)), options.mode_tag, m});
    values.push_back(m);
  }
  write_metrics_csv(options.output_csv, rows);
  return summarize(values);
}

}  // namespace amc
