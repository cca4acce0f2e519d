#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "amc/cli.hpp"
#include "amc/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

// Per-field overrides layered on top of --config.
struct PipelineFlags {
  std::string config_path;
  std::optional<std::string> intrinsics;
  std::optional<int> downsample;
  std::optional<int> n_track;
  std::optional<int> n_avg;
  std::optional<double> filter_a;
  std::optional<double> filter_b;
  std::optional<double> margin;
  std::optional<std::string> mode;
  std::optional<double> saccade_threshold;
  std::optional<std::string> output_dir;
  std::optional<int> max_iterations;
  std::optional<double> step_tolerance;
  bool no_warm_start = false;
  bool no_metrics = false;
  bool no_frames = false;
  bool overlap_io = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Pipeline config JSON");
    cmd->add_option("--intrinsics", intrinsics, "Intrinsics JSON overriding the dataset meta");
    cmd->add_option("--downsample", downsample, "Tracking downsample factor");
    cmd->add_option("--n-track", n_track, "Frames per tracking template");
    cmd->add_option("--n-avg", n_avg, "Frames averaged per output");
    cmd->add_option("--filter-a", filter_a, "View filter base gain");
    cmd->add_option("--filter-b", filter_b, "View filter gain per radian of error");
    cmd->add_option("--margin", margin, "Crop margin fraction per side");
    cmd->add_option("--mode", mode, "smooth or saccade");
    cmd->add_option("--saccade-threshold", saccade_threshold, "Valid fraction that triggers a saccade");
    cmd->add_option("-o,--output", output_dir, "Output directory");
    cmd->add_option("--max-iterations", max_iterations, "Gauss-Newton iteration cap");
    cmd->add_option("--step-tolerance", step_tolerance, "Convergence threshold on |omega|");
    cmd->add_flag("--no-warm-start", no_warm_start, "Start every alignment from identity");
    cmd->add_flag("--no-metrics", no_metrics, "Skip metric computation");
    cmd->add_flag("--no-frames", no_frames, "Do not write stabilized PNGs");
    cmd->add_flag("--overlap-io", overlap_io, "Decode and encode PNGs on helper threads");
  }

  amc::PipelineConfig resolve() const {
    amc::PipelineConfig c;
    if (!config_path.empty()) c = amc::load_pipeline_config(config_path);
    if (intrinsics) c.intrinsics_path = *intrinsics;
    if (downsample) c.downsample = *downsample;
    if (n_track) c.n_track = *n_track;
    if (n_avg) c.n_avg = *n_avg;
    if (filter_a) c.filter_a = *filter_a;
    if (filter_b) c.filter_b = *filter_b;
    if (margin) c.margin = *margin;
    if (mode) c.mode = amc::parse_mode(*mode);
    if (saccade_threshold) c.saccade_threshold = *saccade_threshold;
    if (output_dir) c.output_dir = *output_dir;
    if (max_iterations) c.tracker.max_iterations = *max_iterations;
    if (step_tolerance) c.tracker.step_tolerance = *step_tolerance;
    if (no_warm_start) c.warm_start = false;
    if (no_metrics) c.compute_metrics = false;
    if (no_frames) c.write_frames = false;
    if (overlap_io) c.overlap_io = true;
    c.validate();
    return c;
  }
};

void print_summary_row(const char* tag, const amc::MetricsSummary& s) {
  std::printf("%-5s  nf %.4f px  dI %.5f  sharp %.5f  valid %.2f%%  w_img %.2f  w_view %.2f deg/s\n",
              tag, s.nf_rms, s.delta_i_rms, s.sharpness, s.valid_pct, s.omega_rms_img,
              s.omega_rms_view);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotation-compensating video stabilization"};
  app.require_subcommand(1);

  amc::SynthOptions synth;
  std::string synth_out;
  std::string synth_source = "noise";
  std::optional<std::size_t> synth_frames;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic dataset with ground truth");
  synth_cmd->add_option("output", synth_out, "Dataset directory")->required();
  synth_cmd->add_option("--preset", synth.preset, "Trajectory preset");
  synth_cmd->add_option("--trajectory", synth.trajectory_path, "Trajectory JSON (overrides --preset)");
  synth_cmd->add_option("--source", synth_source, "noise, smooth or chart");
  synth_cmd->add_option("--source-size", synth.source_size, "Source image side length");
  synth_cmd->add_option("--source-fov", synth.source_fov_deg, "Source horizontal FOV, degrees");
  synth_cmd->add_option("--seed", synth.seed, "Texture seed");
  synth_cmd->add_option("--width", synth.width, "Frame width");
  synth_cmd->add_option("--height", synth.height, "Frame height");
  synth_cmd->add_option("--fov", synth.fov_deg, "Camera horizontal FOV, degrees");
  synth_cmd->add_option("--frames", synth_frames, "Render at most this many frames");

  std::string track_dataset;
  std::string track_out = "rotations.csv";
  PipelineFlags track_flags;
  auto* track_cmd = app.add_subcommand("track", "Estimate per-frame orientation only");
  track_cmd->add_option("dataset", track_dataset, "Dataset directory")->required();
  track_cmd->add_option("--rotations", track_out, "Rotations CSV to write");
  track_flags.add_to(track_cmd);

  std::string stab_dataset;
  PipelineFlags stab_flags;
  auto* stab_cmd = app.add_subcommand("stabilize", "Stabilize a dataset");
  stab_cmd->add_option("dataset", stab_dataset, "Dataset directory")->required();
  stab_flags.add_to(stab_cmd);

  amc::MetricsOptions metrics;
  std::string metrics_dir;
  std::string metrics_rot;
  std::string metrics_out = "metrics.csv";
  auto* metrics_cmd = app.add_subcommand("metrics", "Compute metrics over a frame directory");
  metrics_cmd->add_option("frames", metrics_dir, "Directory of PNG frames")->required();
  metrics_cmd->add_option("--rotations", metrics_rot, "Rotations CSV for the angular velocity columns");
  metrics_cmd->add_option("--fps", metrics.fps, "Frame rate");
  metrics_cmd->add_option("--mode-tag", metrics.mode_tag, "Value of the mode column");
  metrics_cmd->add_option("-o,--output", metrics_out, "Metrics CSV to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*synth_cmd) {
      synth.source = amc::parse_source_kind(synth_source);
      synth.max_frames = synth_frames;
      const auto r = amc::cmd_synth(synth, synth_out);
      std::printf("wrote %zu frames at %.6g fps to %s\n", r.frames, r.fps, synth_out.c_str());
    } else if (*track_cmd) {
      const auto r = amc::cmd_track(track_dataset, track_flags.resolve(), track_out);
      std::printf("tracked %zu frames (%zu skipped, %zu lost), mean iterations %.2f\n", r.frames,
                  r.skipped, r.lost, r.mean_iterations);
      if (r.error) {
        std::printf("geodesic error deg: mean %.4f  median %.4f  rms %.4f  max %.4f\n",
                    r.error->mean_deg, r.error->median_deg, r.error->rms_deg, r.error->max_deg);
      }
    } else if (*stab_cmd) {
      const amc::PipelineConfig cfg = stab_flags.resolve();
      const auto r = amc::cmd_stabilize(stab_dataset, cfg);
      std::printf("stabilized %zu frames (%zu skipped, %zu lost, %zu saccades)\n", r.frames,
                  r.skipped, r.lost, r.saccades);
      std::printf("compute %.1f fps, end to end %.1f fps\n", r.compute_fps, r.wall_fps);
      if (cfg.compute_metrics) {
        print_summary_row("none", r.none);
        print_summary_row(r.mode_tag.c_str(), r.mode);
      }
    } else if (*metrics_cmd) {
      metrics.frames_dir = metrics_dir;
      if (!metrics_rot.empty()) metrics.rotations_csv = metrics_rot;
      metrics.output_csv = metrics_out;
      print_summary_row(metrics.mode_tag.c_str(), amc::cmd_metrics(metrics));
    }
  } catch (const amc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const amc::FovExceededError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const amc::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
