#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "amc/cli.hpp"
#include "amc/errors.hpp"
#include "amc/io.hpp"
#include "amc/pipeline.hpp"
#include "amc/synthetic.hpp"

namespace py = pybind11;
using namespace amc;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

// HxW arrays are single-channel frames; HxWxC arrays keep their channels.
Frame to_frame(const FloatArray& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw DataError("expected an HxW or HxWxC array");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  Frame f(w, h, c);
  std::memcpy(f.data().data(), a.data(), f.data().size() * sizeof(float));
  return f;
}

FloatArray to_array(const Frame& f) {
  std::vector<py::ssize_t> shape{f.height(), f.width()};
  if (f.channels() > 1) shape.push_back(f.channels());
  FloatArray a(shape);
  std::memcpy(a.mutable_data(), f.data().data(), f.data().size() * sizeof(float));
  return a;
}

py::array_t<std::uint16_t> to_array(const ValidityMask& m) {
  py::array_t<std::uint16_t> a({m.height(), m.width()});
  std::memcpy(a.mutable_data(), m.counts().data(), m.counts().size() * sizeof(std::uint16_t));
  return a;
}

PipelineConfig config_from(const py::object& obj) {
  PipelineConfig c;
  if (obj.is_none()) return c;
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  from_json(nlohmann::json::parse(text), c);
  c.validate();
  return c;
}

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict metrics_dict(const FrameMetrics& m) {
  py::dict d;
  d["nf_rms"] = m.nf_rms;
  d["delta_i_rms"] = m.delta_i_rms;
  d["sharpness"] = m.sharpness;
  d["valid_pct"] = m.valid_pct;
  d["omega_img"] = m.omega_img;
  d["omega_view"] = m.omega_view;
  return d;
}

py::dict diagnostics_dict(const TrackingDiagnostics& t) {
  py::dict d;
  d["iterations"] = t.iterations;
  d["final_loss"] = t.final_loss;
  d["converged"] = t.converged;
  d["tracking_lost"] = t.tracking_lost;
  d["template_reset"] = t.template_reset;
  d["loss_history"] = t.loss_history;
  return d;
}

}  // namespace

PYBIND11_MODULE(_amc, m) {
  m.doc() = "Rotation-compensating video stabilization";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NearAntipodalError>(m, "NearAntipodalError", base.ptr());
  py::register_exception<DegenerateTemplateError>(m, "DegenerateTemplateError", base.ptr());
  py::register_exception<InsufficientOverlapError>(m, "InsufficientOverlapError", base.ptr());
  py::register_exception<FovExceededError>(m, "FovExceededError", base.ptr());

  m.def("exp_so3", &exp_so3, py::arg("omega"));
  m.def("log_so3", &log_so3, py::arg("r"));
  m.def("geodesic_distance", &geodesic_distance, py::arg("a"), py::arg("b"));

  py::class_<Intrinsics>(m, "Intrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int w, int h) {
             Intrinsics k{fx, fy, cx, cy, w, h};
             k.validate();
             return k;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
           py::arg("height"))
      .def_readwrite("fx", &Intrinsics::fx)
      .def_readwrite("fy", &Intrinsics::fy)
      .def_readwrite("cx", &Intrinsics::cx)
      .def_readwrite("cy", &Intrinsics::cy)
      .def_readwrite("width", &Intrinsics::width)
      .def_readwrite("height", &Intrinsics::height)
      .def("matrix", &Intrinsics::matrix)
      .def("__repr__", [](const Intrinsics& k) {
        return "Intrinsics(fx=" + std::to_string(k.fx) + ", fy=" + std::to_string(k.fy) +
               ", cx=" + std::to_string(k.cx) + ", cy=" + std::to_string(k.cy) +
               ", width=" + std::to_string(k.width) + ", height=" + std::to_string(k.height) + ")";
      });
  m.def("intrinsics_from_fov", &intrinsics_from_fov, py::arg("width"), py::arg("height"),
        py::arg("hfov_deg"));

  m.def("rgb_to_gray", [](const FloatArray& a) { return to_array(rgb_to_gray(to_frame(a))); });
  m.def("read_png", [](const std::filesystem::path& p) { return to_array(read_png(p)); });
  m.def("write_png", [](const std::filesystem::path& p, const FloatArray& a) { write_png(p, to_frame(a)); });

  py::class_<SourceImage>(m, "SourceImage")
      .def_property_readonly("image", [](const SourceImage& s) { return to_array(s.image); })
      .def_readonly("intrinsics", &SourceImage::k);
  m.def(
      "make_source",
      [](const std::string& kind, int size, double fov_deg, std::uint64_t seed) {
        return make_source(parse_source_kind(kind), size, fov_deg, seed);
      },
      py::arg("kind") = "noise", py::arg("size") = 2048, py::arg("fov_deg") = 120.0,
      py::arg("seed") = 7);
  m.def(
      "render_view",
      [](const SourceImage& s, const RotationMatrix& r, const Intrinsics& k) {
        return to_array(render_view(s, r, k));
      },
      py::arg("source"), py::arg("r_world_cam"), py::arg("k"));
  m.def("trajectory_preset", [](const std::string& name) { return to_python(trajectory_preset(name)); });
  m.def("trajectory_preset_names", &trajectory_preset_names);

  m.def(
      "track",
      [](const FloatArray& tpl, const FloatArray& current, const Intrinsics& k,
         const RotationMatrix& initial) {
        const TrackResult r = track(Template::build(to_frame(tpl), k), to_frame(current), initial);
        py::dict d;
        d["rotation"] = r.rotation;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["final_loss"] = r.final_loss;
        d["loss_history"] = r.loss_history;
        return d;
      },
      py::arg("template"), py::arg("current"), py::arg("k"),
      py::arg("initial") = RotationMatrix::Identity(),
      "Aligns two gray frames. The result maps template pixels to current pixels.");

  m.def("normal_flow_rms", [](const FloatArray& prev, const FloatArray& next) {
    return normal_flow(to_frame(prev), to_frame(next)).rms;
  });
  m.def("delta_i_rms", [](const FloatArray& prev, const FloatArray& next) {
    return delta_i_rms(to_frame(prev), to_frame(next));
  });
  m.def("sharpness", [](const FloatArray& f) { return sharpness(to_frame(f)); });

  py::class_<StabilizationPipeline>(m, "Pipeline")
      .def(py::init([](const Intrinsics& k, double dt, const py::object& config) {
             return StabilizationPipeline(k, dt, config_from(config));
           }),
           py::arg("k"), py::arg("dt"), py::arg("config") = py::none())
      .def_property_readonly("output_intrinsics", &StabilizationPipeline::output_intrinsics)
      .def(
          "process",
          [](StabilizationPipeline& p, const FloatArray& frame) {
            const PipelineStep s = p.process(to_frame(frame));
            py::dict d;
            d["frame"] = s.estimate.frame;
            d["r_0j"] = s.estimate.r_0j;
            d["r_view"] = s.stabilized.r_view;
            d["image"] = to_array(s.stabilized.image);
            d["mask"] = to_array(s.stabilized.mask);
            d["unstabilized"] = to_array(s.unstabilized);
            d["saccaded"] = s.stabilized.saccaded;
            d["diagnostics"] = diagnostics_dict(s.estimate.diagnostics);
            d["metrics_none"] = metrics_dict(s.metrics_none);
            d["metrics_mode"] = metrics_dict(s.metrics_mode);
            return d;
          },
          py::arg("frame"));

  m.def(
      "synth",
      [](const std::filesystem::path& out_dir, const std::string& preset, const std::string& source,
         int source_size, std::uint64_t seed, std::optional<std::size_t> frames) {
        SynthOptions o;
        o.preset = preset;
        o.source = parse_source_kind(source);
        o.source_size = source_size;
        o.seed = seed;
        o.max_frames = frames;
        return cmd_synth(o, out_dir).frames;
      },
      py::arg("out_dir"), py::arg("preset") = "flapper12", py::arg("source") = "noise",
      py::arg("source_size") = 2048, py::arg("seed") = 7, py::arg("frames") = py::none());
  m.def(
      "track_dataset",
      [](const std::filesystem::path& dataset, const std::filesystem::path& rotations_csv,
         const py::object& config) {
        const TrackReport r = cmd_track(dataset, config_from(config), rotations_csv);
        py::dict d;
        d["frames"] = r.frames;
        d["lost"] = r.lost;
        d["mean_iterations"] = r.mean_iterations;
        if (r.error) {
          d["mean_error_deg"] = r.error->mean_deg;
          d["max_error_deg"] = r.error->max_deg;
        }
        return d;
      },
      py::arg("dataset"), py::arg("rotations_csv"), py::arg("config") = py::none());
  m.def(
      "stabilize",
      [](const std::filesystem::path& dataset, const py::object& config) {
        return to_python(cmd_stabilize(dataset, config_from(config)));
      },
      py::arg("dataset"), py::arg("config") = py::none());
  m.def(
      "metrics",
      [](const std::filesystem::path& frames_dir, const std::filesystem::path& output_csv, double fps) {
        MetricsOptions o;
        o.frames_dir = frames_dir;
        o.output_csv = output_csv;
        o.fps = fps;
        nlohmann::json j = cmd_metrics(o);
        return to_python(j);
      },
      py::arg("frames_dir"), py::arg("output_csv"), py::arg("fps") = 60.0);
}
