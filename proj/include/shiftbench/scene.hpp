#pragma once

// Scene description, rendering, occlusion measurement and the seeded scene
// sampler that hits a requested occlusion bin.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "categories.hpp"
#include "common.hpp"
#include "environment.hpp"
#include "geometry.hpp"
#include "mesh.hpp"
#include "raster.hpp"
#include "taxonomy.hpp"

namespace shiftbench {

// ---------------------------------------------------------------------------
// Occlusion bins

enum class OcclusionBin { none, light, partial, moderate, heavy, discard };

inline constexpr std::array<OcclusionBin, 5> kKeptBins = {
    OcclusionBin::none, OcclusionBin::light, OcclusionBin::partial,
    OcclusionBin::moderate, OcclusionBin::heavy};

/// Domain name of the bin in the default taxonomy.
inline std::string to_string(OcclusionBin b) {
  switch (b) {
    case OcclusionBin::none: return "no occlusion";
    case OcclusionBin::light: return "light occlusion";
    case OcclusionBin::partial: return "partial occlusion";
    case OcclusionBin::moderate: return "moderate occlusion";
    case OcclusionBin::heavy: return "heavy occlusion";
    case OcclusionBin::discard: return "discard";
  }
  return "?";
}

inline std::optional<OcclusionBin> parse_occlusion_bin(std::string_view name) {
  for (auto b : kKeptBins)
    if (to_string(b) == name) return b;
  return std::nullopt;
}

/// 0 -> none; (0, .2) light; [.2, .4) partial; [.4, .6) moderate;
/// [.6, .8] heavy; (.8, 1] discard.
inline OcclusionBin occlusion_bin(double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw Error(concat("occlusion ratio ", ratio, " outside [0,1]"));
  if (ratio == 0.0) return OcclusionBin::none;
  if (ratio < 0.20) return OcclusionBin::light;
  if (ratio < 0.40) return OcclusionBin::partial;
  if (ratio < 0.60) return OcclusionBin::moderate;
  if (ratio <= 0.80) return OcclusionBin::heavy;
  return OcclusionBin::discard;
}

/// Bounds of a kept bin as (lo, hi, hi_inclusive).
struct BinRange {
  double lo, hi;
  bool hi_inclusive;
};

inline BinRange bin_range(OcclusionBin b) {
  switch (b) {
    case OcclusionBin::none: return {0.0, 0.0, true};
    case OcclusionBin::light: return {0.0, 0.20, false};
    case OcclusionBin::partial: return {0.20, 0.40, false};
    case OcclusionBin::moderate: return {0.40, 0.60, false};
    case OcclusionBin::heavy: return {0.60, 0.80, true};
    case OcclusionBin::discard: return {0.80, 1.0, true};
  }
  return {0, 0, true};
}

// ---------------------------------------------------------------------------
// Scene description

enum class View { front, side, top };

inline std::string to_string(View v) {
  switch (v) {
    case View::front: return "front";
    case View::side: return "side";
    case View::top: return "top";
  }
  return "?";
}

inline View parse_view(std::string_view s) {
  if (s == "front") return View::front;
  if (s == "side") return View::side;
  if (s == "top") return View::top;
  throw Error(concat("no rendition for view '", s, "'"));
}

/// Angles in degrees. Yaw 0 looks down -z (camera on the object's +z, i.e.
/// its front); yaw 90 looks down -x (camera on +x, the object's left side);
/// pitch -90 looks straight down.
struct CameraSpec {
  View view = View::front;
  double base_yaw = 0, base_pitch = 0, base_roll = 0;
  double jitter_yaw = 0, jitter_pitch = 0, jitter_roll = 0;
  double fov_y_deg = 40.0;
  Vec3 target;            // orbit center (object bounds center)
  double distance = 5.0;  // camera-to-target distance along the base axis

  double yaw() const { return base_yaw + jitter_yaw; }
  double pitch() const { return base_pitch + jitter_pitch; }
  double roll() const { return base_roll + jitter_roll; }
};

struct Occluder {
  Vec3 center;
  Vec3 half_extents;
  Mat3 orientation;  // columns are the box axes in world space
  Vec3 color{0.5, 0.4, 0.3};

  Mesh mesh() const { return prim::box(center, half_extents, color, orientation); }
};

struct SceneSpec {
  std::uint64_t seed = 0;
  std::string category;
  std::size_t mesh_variant = 0;
  std::string scene_background = "meadow";
  CameraSpec camera;
  EnvironmentSpec environment;
  std::vector<Occluder> occluders;
  DomainCombination target_combination;
  int width = 512;
  int height = 512;
};

inline const std::array<const char*, 3> kBackgrounds = {"meadow", "roadside", "hillside"};

inline Vec3 direction(double yaw_deg, double pitch_deg) {
  const double y = deg2rad(yaw_deg), p = deg2rad(pitch_deg);
  return {-std::sin(y) * std::cos(p), std::sin(p), -std::cos(y) * std::cos(p)};
}

inline Camera make_camera(const CameraSpec& cs, int width, int height) {
  const Vec3 base_fwd = direction(cs.base_yaw, cs.base_pitch);
  const Vec3 fwd = direction(cs.yaw(), cs.pitch());
  const double yaw = deg2rad(cs.yaw());
  Vec3 right{std::cos(yaw), 0, -std::sin(yaw)};
  Vec3 up = cross(right, fwd);
  const double r = deg2rad(cs.roll());
  const Vec3 right_r = right * std::cos(r) + up * std::sin(r);
  const Vec3 up_r = up * std::cos(r) - right * std::sin(r);
  Camera cam;
  cam.position = cs.target - base_fwd * cs.distance;
  cam.world_to_camera = Mat3::from_rows(normalize(right_r), normalize(up_r), -normalize(fwd));
  cam.fov_y_deg = cs.fov_y_deg;
  cam.width = width;
  cam.height = height;
  cam.near_plane = 0.01 * cs.distance;
  return cam;
}

inline Camera make_camera(const SceneSpec& s) { return make_camera(s.camera, s.width, s.height); }

// ---------------------------------------------------------------------------
// Rendering

struct RenderOutput {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;                    // width*height*3
  std::vector<std::uint8_t> mask_with_occluders;    // 0/1 per pixel
  std::vector<std::uint8_t> mask_without_occluders; // 0/1 per pixel
  double occlusion_ratio = 0;
};

struct MaskPair {
  std::vector<std::uint8_t> with_occluders;
  std::vector<std::uint8_t> without_occluders;
  std::size_t visible = 0;
  std::size_t full = 0;

  double ratio() const {
    if (full == 0) throw Error("object not visible");
    return 1.0 - static_cast<double>(visible) / static_cast<double>(full);
  }
};

inline constexpr ObjectId kTargetId = 1;
inline constexpr ObjectId kOccluderId = 2;
inline constexpr ObjectId kGroundId = 3;
inline constexpr ObjectId kPropId = 4;

/// Two id-only passes: target alone, then target plus occluders.
inline MaskPair render_masks(const Camera& cam, const Mesh& target,
                             const std::vector<Mesh>& occluders) {
  FrameBuffer alone(cam.width, cam.height, false);
  rasterize(alone, cam, target, kTargetId);
  FrameBuffer with(cam.width, cam.height, false);
  rasterize(with, cam, target, kTargetId);
  for (const auto& o : occluders) rasterize(with, cam, o, kOccluderId);
  MaskPair m;
  m.without_occluders = alone.mask(kTargetId);
  m.with_occluders = with.mask(kTargetId);
  m.full = count_set(m.without_occluders);
  m.visible = count_set(m.with_occluders);
  return m;
}

inline MaskPair render_masks(const SceneSpec& spec, const CategoryRegistry& registry) {
  std::vector<Mesh> occ;
  for (const auto& o : spec.occluders) occ.push_back(o.mesh());
  return render_masks(make_camera(spec), registry.build(spec.category, spec.mesh_variant), occ);
}

namespace detail {

/// Background props (trees, rocks, posts) placed on the far side of the
/// target so they can never hide it.
inline Mesh background_props(const SceneSpec& spec) {
  Rng rng(derive_seed(spec.seed, {0xb9u}));
  const auto& env = spec.environment;
  Mesh m;
  const Vec3 cam_dir = -direction(spec.camera.base_yaw, 0);  // target -> camera, horizontal
  const bool top = spec.camera.view == View::top;
  const int count = 10 + static_cast<int>(rng.index(8));
  int kind_bias = 0;
  for (std::size_t i = 0; i < kBackgrounds.size(); ++i)
    if (spec.scene_background == kBackgrounds[i]) kind_bias = static_cast<int>(i);
  for (int i = 0; i < count; ++i) {
    Vec3 p;
    for (int tries = 0; tries < 32; ++tries) {
      const double ang = rng.uniform(0, 2 * kPi);
      const double dist = rng.uniform(7.0, 22.0);
      p = {dist * std::cos(ang), 0, dist * std::sin(ang)};
      if (top || dot(p, cam_dir) < -0.3 * dist) break;
    }
    if (!top && dot(p, cam_dir) >= -0.3 * length(p)) continue;
    const int kind = (static_cast<int>(rng.index(3)) + kind_bias) % 3;
    if (kind == 0) {  // tree
      const double h = rng.uniform(2.0, 4.0);
      m.append(prim::cylinder(p + Vec3{0, h * 0.25, 0}, 0.15, h * 0.25, 1, {0.3, 0.2, 0.12}, 8));
      if (env.season != "winter" || rng.uniform() < 0.3)
        m.append(prim::ellipsoid(p + Vec3{0, h * 0.7, 0}, {h * 0.3, h * 0.35, h * 0.3}, env.foliage, 10, 7));
      else
        m.append(prim::limb(p + Vec3{0, h * 0.45, 0}, p + Vec3{0.4, h * 0.8, 0.1}, 0.06, {0.3, 0.22, 0.15}, 6));
    } else if (kind == 1) {  // rock
      const double r = rng.uniform(0.4, 1.2);
      m.append(prim::ellipsoid(p + Vec3{0, r * 0.4, 0}, {r, r * 0.6, r * 0.8}, {0.45, 0.44, 0.42}, 9, 6));
    } else {  // post or small shed
      const double h = rng.uniform(0.8, 2.5);
      m.append(prim::box(p + Vec3{0, h * 0.5, 0}, {h * 0.3, h * 0.5, h * 0.3}, {0.55, 0.5, 0.45},
                         Mat3::rotation_y(rng.uniform(0, kPi))));
    }
  }
  return m;
}

inline Mesh ground(const SceneSpec& spec) {
  const auto& env = spec.environment;
  Mesh g;
  const double e = 80.0, y = -0.002;
  prim::quad(g, {-e, y, e}, {e, y, e}, {e, y, -e}, {-e, y, -e}, env.ground_albedo);
  if (spec.scene_background == "roadside") {
    const Vec3 road = lerp(env.ground_albedo, {0.25, 0.25, 0.26}, 0.85);
    const double yr = -0.001;
    // road running along the axis perpendicular to the base view direction
    const bool along_z = std::abs(std::sin(deg2rad(spec.camera.base_yaw))) > 0.5;
    if (along_z)
      prim::quad(g, {-4.5, yr, e}, {-2.5, yr, e}, {-2.5, yr, -e}, {-4.5, yr, -e}, road);
    else
      prim::quad(g, {-e, yr, -2.5}, {e, yr, -2.5}, {e, yr, -4.5}, {-e, yr, -4.5}, road);
  } else if (spec.scene_background == "hillside") {
    Rng rng(derive_seed(spec.seed, {0x41u}));
    for (int i = 0; i < 4; ++i) {
      const double a = rng.uniform(0, 2 * kPi), d = rng.uniform(30, 50);
      g.append(prim::ellipsoid({d * std::cos(a), -2.0, d * std::sin(a)}, {12, 7, 12},
                               lerp(env.ground_albedo, env.foliage, 0.4), 12, 6));
    }
  }
  return g;
}

inline Vec3 shade(const Triangle& t, const Vec3& eye, const EnvironmentSpec& env) {
  Vec3 n = normalize(cross(t.b - t.a, t.c - t.a));
  if (dot(n, eye - t.a) < 0) n = -n;
  const double diffuse = std::max(0.0, dot(n, env.sun_dir));
  const double sky = 0.5 + 0.5 * n.y;  // hemispheric ambient
  const Vec3 ambient = lerp(env.sky_horizon, env.sky_top, 0.5) * (env.ambient * (0.6 + 0.4 * sky) * 1.6);
  return t.color.mul(env.light_color * (env.key_intensity * diffuse) + ambient);
}

inline void blend(Vec3& dst, const Vec3& src, double alpha) { dst = dst * (1 - alpha) + src * alpha; }

inline void particles(std::vector<Vec3>& img, int w, int h, const EnvironmentSpec& env) {
  if (env.particles == Particles::none) return;
  Rng rng(env.particle_seed);
  const double scale = w / 512.0;
  for (int i = 0; i < env.particle_count; ++i) {
    const double x = rng.uniform(0, w), y = rng.uniform(0, h);
    if (env.particles == Particles::rain) {
      const double len = rng.uniform(10, 25) * scale;
      const double ang = deg2rad(rng.uniform(100, 110));
      const double dx = std::cos(ang), dy = std::sin(ang);
      const double alpha = rng.uniform(0.25, 0.45);
      for (double s = 0; s < len; s += 0.7) {
        const int px = static_cast<int>(x + dx * s), py = static_cast<int>(y + dy * s);
        if (px >= 0 && px < w && py >= 0 && py < h)
          blend(img[static_cast<std::size_t>(py) * w + px], env.particle_color, alpha);
      }
    } else {
      const double r = rng.uniform(0.8, 2.4) * scale;
      const double alpha = rng.uniform(0.7, 0.95);
      const int x0 = static_cast<int>(std::floor(x - r)), x1 = static_cast<int>(std::ceil(x + r));
      const int y0 = static_cast<int>(std::floor(y - r)), y1 = static_cast<int>(std::ceil(y + r));
      for (int py = std::max(0, y0); py <= std::min(h - 1, y1); ++py)
        for (int px = std::max(0, x0); px <= std::min(w - 1, x1); ++px) {
          const double ddx = px + 0.5 - x, ddy = py + 0.5 - y;
          if (ddx * ddx + ddy * ddy <= r * r)
            blend(img[static_cast<std::size_t>(py) * w + px], env.particle_color, alpha);
        }
    }
  }
}

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace detail

/// Full render: color image plus both masks and the measured ratio.
inline RenderOutput render(const SceneSpec& spec, const CategoryRegistry& registry) {
  const Camera cam = make_camera(spec);
  const Mesh target = registry.build(spec.category, spec.mesh_variant);
  std::vector<Mesh> occ;
  for (const auto& o : spec.occluders) occ.push_back(o.mesh());

  MaskPair masks = render_masks(cam, target, occ);
  if (masks.full == 0) throw Error("object not visible");

  const auto& env = spec.environment;
  const int w = spec.width, h = spec.height;
  FrameBuffer fb(w, h, true);
  auto shader = [&](const Triangle& t) { return detail::shade(t, cam.position, env); };
  rasterize(fb, cam, detail::ground(spec), kGroundId, shader);
  rasterize(fb, cam, detail::background_props(spec), kPropId, shader);
  rasterize(fb, cam, target, kTargetId, shader);
  for (const auto& o : occ) rasterize(fb, cam, o, kOccluderId, shader);

  // sky gradient, then distance fog
  const double sky_fog = 1.0 - std::exp(-env.fog_density * 60.0);
  for (int y = 0; y < h; ++y) {
    const Vec3 sky = lerp(env.sky_top, env.sky_horizon, static_cast<double>(y) / (h - 1));
    for (int x = 0; x < w; ++x) {
      const auto i = fb.index(x, y);
      if (fb.ids[i] == kNoObject) {
        fb.color[i] = lerp(sky, env.fog_color, sky_fog);
      } else {
        const double depth = 1.0 / fb.inv_depth[i];
        const double f = std::exp(-env.fog_density * depth);
        fb.color[i] = fb.color[i] * f + env.fog_color * (1 - f);
      }
    }
  }
  detail::particles(fb.color, w, h, env);

  RenderOutput out;
  out.width = w;
  out.height = h;
  out.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < fb.color.size(); ++i) {
    const Vec3 c = fb.color[i].mul(env.grade);
    out.rgb[3 * i] = detail::to_byte(c.x);
    out.rgb[3 * i + 1] = detail::to_byte(c.y);
    out.rgb[3 * i + 2] = detail::to_byte(c.z);
  }
  out.occlusion_ratio = masks.ratio();
  out.mask_with_occluders = std::move(masks.with_occluders);
  out.mask_without_occluders = std::move(masks.without_occluders);
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

/// Occluder search ran out of attempts; carries the spec as far as it got
/// (no occluders) for the failure report.
class BinUnreachable : public Error {
 public:
  BinUnreachable(const std::string& what, SceneSpec spec)
      : Error(what), spec_(std::move(spec)) {}
  const SceneSpec& spec() const { return spec_; }

 private:
  SceneSpec spec_;
};

struct SceneOptions {
  int width = 512;
  int height = 512;
  double jitter_deg = 5.0;
  double fov_y_deg = 40.0;
  int attempt_budget = 64;
};

/// Domain names the renderer needs, pulled out of a complete combination by
/// shift name.
struct SceneLabels {
  std::string weather, view, time_of_day, season, occlusion;

  static SceneLabels from(const DomainTaxonomy& tax, const DomainCombination& c) {
    const auto names = tax.names(c);
    auto get = [&](const char* shift) {
      auto it = names.find(shift);
      if (it == names.end())
        throw Error(concat("scene generation needs a '", shift, "' shift label"));
      return it->second;
    };
    return {get("weathers"), get("views"), get("time"), get("seasons"), get("occlusion")};
  }
};

namespace detail {

struct PixelBox {
  double x0, y0, x1, y1;  // continuous pixel coords, [x0, x1) x [y0, y1)
};

inline std::optional<PixelBox> mask_bounds(const std::vector<std::uint8_t>& m, int w, int h) {
  int x0 = w, y0 = h, x1 = -1, y1 = -1;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (m[static_cast<std::size_t>(y) * w + x]) {
        x0 = std::min(x0, x); x1 = std::max(x1, x);
        y0 = std::min(y0, y); y1 = std::max(y1, y);
      }
  if (x1 < 0) return std::nullopt;
  return PixelBox{double(x0), double(y0), double(x1 + 1), double(y1 + 1)};
}

/// Camera-facing box whose front face covers `rect` at view depth `depth`.
inline Occluder screen_box(const Camera& cam, const PixelBox& rect, double depth,
                           double thickness, const Vec3& color) {
  const Vec3 p0 = cam.unproject(rect.x0, rect.y1, depth);  // bottom-left
  const Vec3 p1 = cam.unproject(rect.x1, rect.y0, depth);  // top-right
  const Vec3 center_cam{(p0.x + p1.x) * 0.5, (p0.y + p1.y) * 0.5, -(depth + thickness * 0.5)};
  Occluder o;
  o.center = cam.to_world(center_cam);
  o.half_extents = {std::abs(p1.x - p0.x) * 0.5, std::abs(p1.y - p0.y) * 0.5, thickness * 0.5};
  o.orientation = cam.world_to_camera.transposed();
  o.color = color;
  return o;
}

inline bool in_bin(double r, OcclusionBin b) { return occlusion_bin(r) == b; }

}  // namespace detail

/// Builds a deterministic SceneSpec for one complete, valid combination.
///
/// Occluders are camera-facing boxes slid in from one side of the target's
/// screen footprint. Each attempt renders the id-only mask passes and
/// bisects the slide amount toward the requested bin; the first placement
/// whose measured ratio lands in the bin is kept. Running out of the attempt
/// budget raises "bin unreachable".
inline SceneSpec sample_scene(const DomainTaxonomy& tax, const CategoryRegistry& registry,
                              const DomainCombination& combination,
                              const std::string& category, std::uint64_t seed,
                              const SceneOptions& opt = {}) {
  const auto verdict = validate_combination(tax, combination);
  if (!verdict) throw Error("cannot sample scene: " + verdict.reason);
  const auto& cat = registry.at(category);
  const auto labels = SceneLabels::from(tax, combination);
  const auto bin = parse_occlusion_bin(labels.occlusion);
  if (!bin) throw Error(concat("no occlusion bin named '", labels.occlusion, "'"));

  Rng rng(derive_seed(seed, {0x5ceu}));
  SceneSpec s;
  s.seed = seed;
  s.category = category;
  s.mesh_variant = rng.index(cat.variants.size());
  s.scene_background = kBackgrounds[rng.index(kBackgrounds.size())];
  s.target_combination = combination;
  s.width = opt.width;
  s.height = opt.height;
  s.environment = derive_environment(labels.time_of_day, labels.season, labels.weather, seed);

  const Mesh target = registry.build(category, s.mesh_variant);
  const auto bounds = target.bounds();
  auto& cs = s.camera;
  cs.view = parse_view(labels.view);
  switch (cs.view) {
    case View::front: cs.base_yaw = 0; cs.base_pitch = 0; break;
    case View::side: cs.base_yaw = 90; cs.base_pitch = 0; break;
    case View::top: cs.base_yaw = 0; cs.base_pitch = -90; break;
  }
  cs.jitter_yaw = rng.uniform(-opt.jitter_deg, opt.jitter_deg);
  cs.jitter_pitch = rng.uniform(-opt.jitter_deg, opt.jitter_deg);
  cs.jitter_roll = rng.uniform(-opt.jitter_deg, opt.jitter_deg);
  cs.fov_y_deg = opt.fov_y_deg;
  cs.target = bounds.center();
  const double radius = std::max(0.5, target.radius_about(cs.target));
  cs.distance = radius / std::sin(deg2rad(opt.fov_y_deg) * 0.5) * 1.25;

  if (*bin == OcclusionBin::none) return s;

  const Camera cam = make_camera(s);
  const MaskPair bare = render_masks(cam, target, {});
  if (bare.full == 0) throw Error("object not visible");
  const auto box = detail::mask_bounds(bare.without_occluders, cam.width, cam.height);
  double nearest = std::numeric_limits<double>::max();
  for (const auto& t : target.triangles)
    for (const auto* p : {&t.a, &t.b, &t.c}) nearest = std::min(nearest, -cam.to_camera(*p).z);

  const auto range = bin_range(*bin);
  static const std::array<Vec3, 5> kPropColors = {
      Vec3{0.55, 0.38, 0.2}, Vec3{0.5, 0.5, 0.52}, Vec3{0.62, 0.6, 0.55},
      Vec3{0.3, 0.36, 0.25}, Vec3{0.6, 0.25, 0.18}};

  const double bw = box->x1 - box->x0, bh = box->y1 - box->y0;
  const double pad = 3.0;
  int attempts = 0;
  bool full_cross = range.lo >= 0.4;
  while (attempts < opt.attempt_budget) {
    // one placement family: side, cross-axis extent, depth, color
    const int side = static_cast<int>(rng.index(4));
    const double cross = full_cross ? 1.0 : rng.uniform(0.6, 1.0);
    const double cross_pos = rng.uniform();
    const double depth = std::max(cam.near_plane * 2, nearest * rng.uniform(0.4, 0.75));
    const Vec3 color = kPropColors[rng.index(kPropColors.size())];
    const double goal = range.lo + (range.hi - range.lo) * rng.uniform(0.3, 0.7);

    auto placement = [&](double t) {
      detail::PixelBox r{};
      const bool horizontal = side < 2;
      const double main_len = horizontal ? bw : bh;
      const double cross_len = horizontal ? bh : bw;
      double c0, c1;
      if (cross >= 1.0) {
        c0 = (horizontal ? box->y0 : box->x0) - pad;
        c1 = (horizontal ? box->y1 : box->x1) + pad;
      } else {
        const double ext = cross * cross_len;
        c0 = (horizontal ? box->y0 : box->x0) + (cross_len - ext) * cross_pos;
        c1 = c0 + ext;
      }
      const double cover = t * main_len;
      switch (side) {
        case 0: r = {box->x0 - pad, c0, box->x0 + cover, c1}; break;  // from left
        case 1: r = {box->x1 - cover, c0, box->x1 + pad, c1}; break;  // from right
        case 2: r = {c0, box->y0 - pad, c1, box->y0 + cover}; break;  // from top
        default: r = {c0, box->y1 - cover, c1, box->y1 + pad}; break;  // from bottom
      }
      return detail::screen_box(cam, r, depth, depth * 0.08, color);
    };

    double lo = 0.0, hi = 1.0;
    double t = std::clamp(goal / cross, 0.02, 1.0);
    while (attempts < opt.attempt_budget) {
      ++attempts;
      const Occluder o = placement(t);
      const double r = render_masks(cam, target, {o.mesh()}).ratio();
      if (detail::in_bin(r, *bin)) {
        s.occluders.push_back(o);
        return s;
      }
      if (r < range.lo || (r == 0.0 && *bin == OcclusionBin::light)) {
        lo = t;
        if (t >= 1.0) {
          full_cross = true;  // this family cannot cover enough
          break;
        }
      } else {
        hi = t;
      }
      if (hi - lo < 1e-4) {
        if (hi >= 1.0) full_cross = true;
        break;
      }
      t = 0.5 * (lo + hi);
    }
  }
  throw BinUnreachable(concat("bin unreachable: '", to_string(*bin), "' not hit within ",
                              opt.attempt_budget, " attempts (category ", category, ", seed ",
                              seed, ")"),
                       std::move(s));
}

// ---------------------------------------------------------------------------
// Serialization of specs (for failure dumps and debugging)

inline nlohmann::json to_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline nlohmann::json to_json(const SceneSpec& s, const DomainTaxonomy& tax) {
  nlohmann::json occ = nlohmann::json::array();
  for (const auto& o : s.occluders)
    occ.push_back({{"center", to_json(o.center)}, {"half_extents", to_json(o.half_extents)},
                   {"axes", {to_json(o.orientation.col(0)), to_json(o.orientation.col(1)),
                             to_json(o.orientation.col(2))}},
                   {"color", to_json(o.color)}});
  const auto& c = s.camera;
  return {{"seed", s.seed}, {"category", s.category}, {"mesh_variant", s.mesh_variant},
          {"scene_background", s.scene_background},
          {"camera", {{"view", to_string(c.view)},
                      {"base_orientation", {c.base_yaw, c.base_pitch, c.base_roll}},
                      {"jitter", {c.jitter_yaw, c.jitter_pitch, c.jitter_roll}},
                      {"fov_y_deg", c.fov_y_deg}, {"target", to_json(c.target)},
                      {"distance", c.distance}}},
          {"environment", s.environment.to_json()},
          {"occluders", occ},
          {"target_combination", tax.names(s.target_combination)},
          {"resolution", {s.width, s.height}}};
}

}  // namespace shiftbench
