#include "amc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "amc/errors.hpp"

namespace amc {

namespace {

// Classic 2D gradient noise on a permutation lattice.
class GradientNoise {
 public:
  explicit GradientNoise(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 256; ++i) perm_[i] = static_cast<std::uint8_t>(i);
    // Fisher-Yates with explicit modulo so the table does not depend on the
    // standard library's shuffle.
    for (int i = 255; i > 0; --i) {
      const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(perm_[i], perm_[j]);
    }
    for (int i = 0; i < 256; ++i) {
      const double a = 2.0 * kPi * static_cast<double>(rng() >> 11) * 0x1.0p-53;
      gx_[i] = std::cos(a);
      gy_[i] = std::sin(a);
    }
  }

  double operator()(double x, double y) const {
    const double fx0 = std::floor(x);
    const double fy0 = std::floor(y);
    const int ix = static_cast<int>(fx0) & 255;
    const int iy = static_cast<int>(fy0) & 255;
    const double tx = x - fx0;
    const double ty = y - fy0;
    const double u = fade(tx);
    const double v = fade(ty);
    const double n00 = dot(hash(ix, iy), tx, ty);
    const double n10 = dot(hash(ix + 1, iy), tx - 1.0, ty);
    const double n01 = dot(hash(ix, iy + 1), tx, ty - 1.0);
    const double n11 = dot(hash(ix + 1, iy + 1), tx - 1.0, ty - 1.0);
    const double a = n00 + u * (n10 - n00);
    const double b = n01 + u * (n11 - n01);
    return a + v * (b - a);
  }

 private:
  static double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }
  int hash(int x, int y) const { return perm_[(perm_[x & 255] + y) & 255]; }
  double dot(int h, double x, double y) const { return gx_[h] * x + gy_[h] * y; }

  std::array<std::uint8_t, 256> perm_{};
  std::array<double, 256> gx_{};
  std::array<double, 256> gy_{};
};

double fbm(const GradientNoise& noise, double x, double y, double wavelength, int octaves,
           double persistence) {
  double sum = 0.0;
  double amp = 1.0;
  double freq = 1.0 / wavelength;
  for (int o = 0; o < octaves; ++o) {
    // Offsetting each octave decorrelates the lattice origins.
    sum += amp * noise(x * freq + 17.3 * o, y * freq - 9.1 * o);
    amp *= persistence;
    freq *= 2.0;
  }
  return sum;
}

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

NoiseTextureParams NoiseTextureParams::smooth() {
  NoiseTextureParams p;
  p.base_wavelength = 160.0;
  p.octaves = 5;
  p.persistence = 0.55;
  return p;
}

Frame make_noise_texture(const NoiseTextureParams& params) {
  const int n = params.size;
  if (n < 8) throw ConfigError("texture size must be >= 8");
  const GradientNoise lum(params.seed);
  const std::array<GradientNoise, 3> chroma = {GradientNoise(params.seed + 101),
                                               GradientNoise(params.seed + 202),
                                               GradientNoise(params.seed + 303)};
  Frame out(n, n, 3);
  for (int y = 0; y < n; ++y) {
    float* row = out.row(y);
    for (int x = 0; x < n; ++x) {
      const double l = fbm(lum, x, y, params.base_wavelength, params.octaves, params.persistence);
      for (int c = 0; c < 3; ++c) {
        const double ch = fbm(chroma[c], x, y, 2.0 * params.base_wavelength, 2, 0.5);
        const double v = 0.5 + params.contrast * (l + params.chroma * ch);
        row[3 * x + c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return out;
}

Frame make_test_chart(int size, std::uint64_t seed) {
  NoiseTextureParams bg;
  bg.size = size;
  bg.seed = seed;
  bg.contrast = 0.18;
  Frame out = make_noise_texture(bg);
  const int cell = std::max(size / 8, 8);
  const double edge = 2.5;  // soft edge half-width, pixels
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int cx = x / cell;
      const int cy = y / cell;
      const double lx = (x % cell) - 0.5 * cell;
      const double ly = (y % cell) - 0.5 * cell;
      const double r = std::hypot(lx, ly);
      double v = -1.0;  // keep background
      double alpha = 0.0;
      switch ((cx + 3 * cy) % 4) {
        case 0: {  // soft checker, 8 squares across the cell
          const double period = cell / 4.0;
          const double sx = std::sin(kPi * (x + 0.5) / (period / 2.0));
          const double sy = std::sin(kPi * (y + 0.5) / (period / 2.0));
          v = 0.5 + 0.4 * std::tanh(3.0 * sx * sy);
          alpha = 1.0 - smoothstep(0.42 * cell - edge, 0.42 * cell + edge, std::max(std::abs(lx), std::abs(ly)));
          break;
        }
        case 1:  // disc
          v = ((cx + cy) % 2) ? 0.85 : 0.12;
          alpha = 1.0 - smoothstep(0.3 * cell - edge, 0.3 * cell + edge, r);
          break;
        case 2:  // rings
          v = 0.5 + 0.38 * std::cos(2.0 * kPi * r / (cell / 10.0));
          alpha = 1.0 - smoothstep(0.45 * cell - edge, 0.45 * cell + edge, r);
          break;
        default:  // diagonal ramp
          v = 0.15 + 0.7 * (lx + ly + cell) / (2.0 * cell);
          alpha = 1.0 - smoothstep(0.35 * cell - edge, 0.35 * cell + edge,
                                   std::max(std::abs(lx), std::abs(ly)));
          break;
      }
      if (alpha <= 0.0) continue;
      for (int c = 0; c < 3; ++c) {
        const double tint = v * (1.0 - 0.15 * c * ((cx + cy) % 2));
        float& px = out.at(x, y, c);
        px = static_cast<float>((1.0 - alpha) * px + alpha * tint);
      }
    }
  }
  return out;
}

SourceImage make_source(SourceKind kind, int size, double fov_deg, std::uint64_t seed) {
  SourceImage s;
  if (kind != SourceKind::kChart) {
    NoiseTextureParams p = kind == SourceKind::kSmooth ? NoiseTextureParams::smooth()
                                                       : NoiseTextureParams{};
    p.size = size;
    p.seed = seed;
    // Keep the feature scale fixed relative to the image so smaller test
    // sources stay statistically similar.
    p.base_wavelength *= size / 2048.0;
    s.image = make_noise_texture(p);
  } else {
    s.image = make_test_chart(size, seed);
  }
  s.k = intrinsics_from_fov(size, size, fov_deg);
  return s;
}

SourceKind parse_source_kind(const std::string& name) {
  if (name == "noise") return SourceKind::kNoise;
  if (name == "smooth") return SourceKind::kSmooth;
  if (name == "chart") return SourceKind::kChart;
  throw ConfigError("unknown source kind '" + name + "' (expected noise, smooth or chart)");
}

Frame render_view(const SourceImage& source, const RotationMatrix& r_world_cam,
                  const Intrinsics& k_cam) {
  // The four corners bound the footprint: a pinhole-to-pinhole rotation maps
  // the camera rectangle onto a convex quadrilateral.
  const double w = k_cam.width - 1;
  const double h = k_cam.height - 1;
  for (const PixelCoord& c : {PixelCoord(0, 0), PixelCoord(w, 0), PixelCoord(0, h), PixelCoord(w, h)}) {
    const auto q = rotational_warp(r_world_cam, k_cam.pixel_to_normalized(c));
    bool inside = false;
    if (q) {
      const PixelCoord s = source.k.normalized_to_pixel(*q);
      inside = s.x() >= 0.0 && s.y() >= 0.0 && s.x() <= source.image.width() - 1 &&
               s.y() <= source.image.height() - 1;
    }
    if (!inside) throw FovExceededError("camera view leaves the source field of view");
  }
  auto [frame, mask] = warp_frame(source.image, r_world_cam, source.k, k_cam);
  for (auto c : mask.counts()) {
    if (c == 0) throw FovExceededError("camera view leaves the source field of view");
  }
  return std::move(frame);
}

std::size_t ShakeTrajectory::frame_count() const {
  return static_cast<std::size_t>(std::llround(duration * fps));
}

RotationMatrix ShakeTrajectory::base_at(double t) const {
  if (base.empty()) return RotationMatrix::Identity();
  if (t <= base.front().t) return exp_so3(base.front().rotation);
  if (t >= base.back().t) return exp_so3(base.back().rotation);
  auto hi = std::upper_bound(base.begin(), base.end(), t,
                             [](double v, const BaseKeyframe& k) { return v < k.t; });
  auto lo = hi - 1;
  const double u = smoothstep(lo->t, hi->t, t);
  const RotationMatrix ra = exp_so3(lo->rotation);
  const RotationMatrix rb = exp_so3(hi->rotation);
  return ra * exp_so3(u * log_so3(ra.transpose() * rb));
}

So3Vector ShakeTrajectory::shake_at(double t) const {
  So3Vector w = So3Vector::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    for (const Sinusoid& s : perturbation[axis]) {
      w[axis] += s.amplitude * std::sin(2.0 * kPi * s.frequency * t + s.phase);
    }
  }
  return w;
}

RotationMatrix ShakeTrajectory::at(double t) const { return base_at(t) * exp_so3(shake_at(t)); }

void ShakeTrajectory::validate() const {
  if (!(fps > 0.0)) throw ConfigError("trajectory fps must be > 0");
  if (!(duration > 0.0)) throw ConfigError("trajectory duration must be > 0");
  for (const auto& axis : perturbation) {
    for (const Sinusoid& s : axis) {
      if (!(std::abs(s.amplitude) < 0.2)) throw ConfigError("shake amplitude must be < 0.2 rad");
      if (!(s.frequency >= 0.0 && s.frequency < fps / 2.0)) {
        throw ConfigError("shake frequency must be below the Nyquist rate");
      }
    }
  }
  for (std::size_t i = 1; i < base.size(); ++i) {
    if (!(base[i].t > base[i - 1].t)) throw ConfigError("base keyframes must be strictly increasing in time");
  }
  for (const BaseKeyframe& k : base) {
    if (!k.rotation.allFinite() || k.rotation.norm() >= kPi - 0.01) {
      throw ConfigError("base keyframe rotations must be finite and below pi");
    }
  }
}

void to_json(nlohmann::json& j, const ShakeTrajectory& t) {
  j = nlohmann::json::object();
  j["fps"] = t.fps;
  j["duration"] = t.duration;
  j["base"] = nlohmann::json::array();
  for (const BaseKeyframe& k : t.base) {
    j["base"].push_back({{"t", k.t}, {"rotation", {k.rotation.x(), k.rotation.y(), k.rotation.z()}}});
  }
  const char* names[3] = {"x", "y", "z"};
  for (int axis = 0; axis < 3; ++axis) {
    auto& arr = j["perturbation"][names[axis]] = nlohmann::json::array();
    for (const Sinusoid& s : t.perturbation[axis]) {
      arr.push_back({{"amplitude", s.amplitude}, {"frequency", s.frequency}, {"phase", s.phase}});
    }
  }
}

void from_json(const nlohmann::json& j, ShakeTrajectory& t) {
  try {
    t = ShakeTrajectory{};
    t.fps = j.value("fps", 60.0);
    t.duration = j.value("duration", 20.0);
    if (j.contains("base")) {
      for (const auto& k : j.at("base")) {
        const auto& r = k.at("rotation");
        t.base.push_back({k.at("t").get<double>(),
                          So3Vector(r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>())});
      }
    }
    if (j.contains("perturbation")) {
      const char* names[3] = {"x", "y", "z"};
      for (int axis = 0; axis < 3; ++axis) {
        if (!j.at("perturbation").contains(names[axis])) continue;
        for (const auto& s : j.at("perturbation").at(names[axis])) {
          t.perturbation[axis].push_back({s.at("amplitude").get<double>(),
                                          s.at("frequency").get<double>(),
                                          s.value("phase", 0.0)});
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad trajectory: ") + e.what());
  }
  t.validate();
}

namespace {

// 12 Hz fundamental with a 24 Hz harmonic at half amplitude per axis.
void add_flapper_shake(ShakeTrajectory& t) {
  const double d = kDegToRad;
  const std::array<double, 3> amp = {0.33 * d, 0.33 * d, 0.48 * d};
  const std::array<double, 3> phase = {0.0, 1.9, 4.1};
  for (int axis = 0; axis < 3; ++axis) {
    t.perturbation[axis] = {{amp[axis], 12.0, phase[axis]},
                            {0.5 * amp[axis], 24.0, phase[axis] + 0.7}};
  }
}

}  // namespace

ShakeTrajectory trajectory_preset(const std::string& name) {
  ShakeTrajectory t;
  t.fps = 60.0;
  if (name == "static") {
    t.duration = 2.0;
  } else if (name == "flapper12") {
    t.duration = 20.0;
    const double d = kDegToRad;
    t.base = {{0.0, {0.0, 0.0, 0.0}},
              {4.0, {2.0 * d, 8.0 * d, 0.0}},
              {8.0, {-3.0 * d, -6.0 * d, 2.0 * d}},
              {12.0, {1.0 * d, 10.0 * d, -1.0 * d}},
              {16.0, {3.0 * d, -4.0 * d, 1.0 * d}},
              {20.0, {0.0, 0.0, 0.0}}};
    add_flapper_shake(t);
  } else if (name == "pan_shake") {
    t.duration = 5.0;
    const double d = kDegToRad;
    t.base = {{0.0, {0.0, -26.0 * d, 0.0}}, {5.0, {0.0, 26.0 * d, 0.0}}};
    add_flapper_shake(t);
  } else if (name == "yaw_ramp") {
    t.duration = 5.0;
    t.base = {{0.0, {0.0, 0.0, 0.0}}, {5.0, {0.0, 0.25, 0.0}}};
  } else {
    throw ConfigError("unknown trajectory preset '" + name + "'");
  }
  t.validate();
  return t;
}

std::vector<std::string> trajectory_preset_names() {
  return {"flapper12", "pan_shake", "static", "yaw_ramp"};
}

SyntheticSequence::SyntheticSequence(SourceImage source, ShakeTrajectory trajectory,
                                     Intrinsics k_cam)
    : source_(std::move(source)), trajectory_(std::move(trajectory)), k_cam_(k_cam) {
  trajectory_.validate();
  k_cam_.validate();
  r_w0_ = trajectory_.at(0.0);
}

Frame SyntheticSequence::frame(std::size_t j) const {
  Frame f = render_view(source_, world_rotation(j), k_cam_);
  f.index = static_cast<std::int64_t>(j);
  f.timestamp = static_cast<double>(j) / trajectory_.fps;
  return f;
}

RotationMatrix SyntheticSequence::world_rotation(std::size_t j) const {
  return trajectory_.at(static_cast<double>(j) / trajectory_.fps);
}

RotationMatrix SyntheticSequence::ground_truth(std::size_t j) const {
  return r_w0_.transpose() * world_rotation(j);
}

GeneratedSequence generate_sequence(const SourceImage& source, const ShakeTrajectory& trajectory,
                                    const Intrinsics& k_cam) {
  SyntheticSequence seq(source, trajectory, k_cam);
  GeneratedSequence out;
  out.frames.reserve(seq.size());
  out.ground_truth.reserve(seq.size());
  for (std::size_t j = 0; j < seq.size(); ++j) {
    out.frames.push_back(seq.frame(j));
    out.ground_truth.push_back(seq.ground_truth(j));
  }
  return out;
}

}  // namespace amc
