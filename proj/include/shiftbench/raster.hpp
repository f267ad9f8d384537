#pragma once

// Z-buffered triangle rasterizer with an object-id channel.
//
// Camera space: +x right, +y up, the camera looks down -z. Screen space: pixel
// (0,0) is the top-left corner, samples are taken at pixel centers, and
// coverage follows a top-left fill rule so abutting triangles never share a
// sample.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "common.hpp"
#include "geometry.hpp"
#include "mesh.hpp"

namespace shiftbench {

struct Camera {
  Vec3 position;
  /// Rows are the camera's right, up and backward axes in world coordinates.
  Mat3 world_to_camera;
  double fov_y_deg = 40.0;
  int width = 512;
  int height = 512;
  double near_plane = 0.02;

  Vec3 to_camera(const Vec3& p) const { return world_to_camera * (p - position); }
  Vec3 to_world(const Vec3& c) const { return world_to_camera.transposed() * c + position; }
  Vec3 forward() const { return -world_to_camera.row(2); }

  double focal() const { return 1.0 / std::tan(deg2rad(fov_y_deg) * 0.5); }
  double aspect() const { return static_cast<double>(width) / height; }

  /// Camera-space point (in front of the camera) to continuous pixel coords.
  void project(const Vec3& c, double& px, double& py) const {
    const double depth = -c.z;
    const double xn = focal() / aspect() * c.x / depth;
    const double yn = focal() * c.y / depth;
    px = (xn + 1.0) * 0.5 * width;
    py = (1.0 - yn) * 0.5 * height;
  }

  /// Camera-space point at view depth `depth` under continuous pixel coords.
  Vec3 unproject(double px, double py, double depth) const {
    const double xn = 2.0 * px / width - 1.0;
    const double yn = 1.0 - 2.0 * py / height;
    return {xn * depth * aspect() / focal(), yn * depth / focal(), -depth};
  }
};

using ObjectId = std::uint16_t;
inline constexpr ObjectId kNoObject = 0;

struct FrameBuffer {
  int width = 0, height = 0;
  /// 1 / view depth; 0 means empty (infinitely far).
  std::vector<double> inv_depth;
  std::vector<ObjectId> ids;
  /// Linear RGB per pixel; only filled when a shader is supplied.
  std::vector<Vec3> color;

  FrameBuffer(int w, int h, bool with_color)
      : width(w), height(h),
        inv_depth(static_cast<std::size_t>(w) * h, 0.0),
        ids(static_cast<std::size_t>(w) * h, kNoObject) {
    if (w <= 0 || h <= 0) throw Error("framebuffer needs positive dimensions");
    if (with_color) color.assign(static_cast<std::size_t>(w) * h, Vec3{});
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }

  /// Binary mask of pixels whose front-most object is `id`.
  std::vector<std::uint8_t> mask(ObjectId id) const {
    std::vector<std::uint8_t> m(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) m[i] = ids[i] == id ? 1 : 0;
    return m;
  }
};

/// Per-triangle flat color, given the world-space triangle.
using FlatShader = std::function<Vec3(const Triangle&)>;

namespace detail {

/// Clips a camera-space triangle against the near plane; returns 0, 3 or 4
/// vertices.
inline int clip_near(const Vec3 (&in)[3], double near_plane, Vec3 (&out)[4]) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Vec3& a = in[i];
    const Vec3& b = in[(i + 1) % 3];
    const double da = -a.z - near_plane, db = -b.z - near_plane;
    if (da >= 0) out[n++] = a;
    if ((da >= 0) != (db >= 0)) {
      const double t = da / (da - db);
      out[n++] = a + (b - a) * t;
    }
  }
  return n;
}

struct ScreenVertex {
  double x, y, inv_w;
};

inline bool top_left(const ScreenVertex& a, const ScreenVertex& b) {
  // With counter-clockwise (positive area) winding in y-down pixel space.
  const double dx = b.x - a.x, dy = b.y - a.y;
  return (dy < 0) || (dy == 0 && dx > 0);
}

inline void fill(FrameBuffer& fb, ScreenVertex a, ScreenVertex b, ScreenVertex c,
                 ObjectId id, const Vec3* shade) {
  // Evaluated in a canonical vertex order so an edge shared by two triangles
  // gives exactly opposite values in both; otherwise pixel centers on the
  // edge can be dropped by both.
  auto edge = [](const ScreenVertex& p, const ScreenVertex& q, double x, double y) {
    const auto raw = [&](const ScreenVertex& u, const ScreenVertex& v) {
      return (v.x - u.x) * (y - u.y) - (v.y - u.y) * (x - u.x);
    };
    const bool ordered = p.x < q.x || (p.x == q.x && p.y < q.y);
    return ordered ? raw(p, q) : -raw(q, p);
  };
  double area = edge(a, b, c.x, c.y);
  if (area == 0 || !std::isfinite(area)) return;
  if (area < 0) {
    std::swap(b, c);
    area = -area;
  }
  const double min_x = std::min({a.x, b.x, c.x}), max_x = std::max({a.x, b.x, c.x});
  const double min_y = std::min({a.y, b.y, c.y}), max_y = std::max({a.y, b.y, c.y});
  // clamp before converting; near-plane vertices can project very far out
  auto px_lo = [](double v, int n) { return static_cast<int>(std::floor(std::clamp(v - 0.5, -1.0, n + 1.0))); };
  auto px_hi = [](double v, int n) { return static_cast<int>(std::ceil(std::clamp(v - 0.5, -1.0, n + 1.0))); };
  const int x0 = std::max(0, px_lo(min_x, fb.width));
  const int x1 = std::min(fb.width - 1, px_hi(max_x, fb.width));
  const int y0 = std::max(0, px_lo(min_y, fb.height));
  const int y1 = std::min(fb.height - 1, px_hi(max_y, fb.height));
  if (x0 > x1 || y0 > y1) return;

  const bool tl0 = top_left(b, c), tl1 = top_left(c, a), tl2 = top_left(a, b);
  for (int y = y0; y <= y1; ++y) {
    const double py = y + 0.5;
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5;
      const double w0 = edge(b, c, px, py);
      const double w1 = edge(c, a, px, py);
      const double w2 = edge(a, b, px, py);
      if (w0 < 0 || w1 < 0 || w2 < 0) continue;
      if ((w0 == 0 && !tl0) || (w1 == 0 && !tl1) || (w2 == 0 && !tl2)) continue;
      const double inv_w = (w0 * a.inv_w + w1 * b.inv_w + w2 * c.inv_w) / area;
      const auto i = fb.index(x, y);
      if (inv_w <= fb.inv_depth[i]) continue;
      fb.inv_depth[i] = inv_w;
      fb.ids[i] = id;
      if (shade && !fb.color.empty()) fb.color[i] = *shade;
    }
  }
}

}  // namespace detail

/// Rasterizes one triangle in world space. Depth ties keep the earlier draw.
inline void rasterize(FrameBuffer& fb, const Camera& cam, const Triangle& tri,
                      ObjectId id, const Vec3* shade = nullptr) {
  const Vec3 in[3] = {cam.to_camera(tri.a), cam.to_camera(tri.b), cam.to_camera(tri.c)};
  Vec3 poly[4];
  const int n = detail::clip_near(in, cam.near_plane, poly);
  if (n < 3) return;
  detail::ScreenVertex sv[4];
  for (int i = 0; i < n; ++i) {
    cam.project(poly[i], sv[i].x, sv[i].y);
    sv[i].inv_w = 1.0 / -poly[i].z;
  }
  for (int k = 1; k + 1 < n; ++k) detail::fill(fb, sv[0], sv[k], sv[k + 1], id, shade);
}

inline void rasterize(FrameBuffer& fb, const Camera& cam, const Mesh& mesh,
                      ObjectId id, const FlatShader& shader = {}) {
  for (const auto& t : mesh.triangles) {
    if (shader) {
      const Vec3 c = shader(t);
      rasterize(fb, cam, t, id, &c);
    } else {
      rasterize(fb, cam, t, id, nullptr);
    }
  }
}

inline std::size_t count_set(const std::vector<std::uint8_t>& mask) {
  std::size_t n = 0;
  for (auto v : mask) n += v != 0;
  return n;
}

}  // namespace shiftbench
