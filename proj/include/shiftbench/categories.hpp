#pragma once

// Object category registry. Every default category ships three procedural
// mesh variants assembled from primitives; user meshes can be appended as
// extra variants.

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "common.hpp"
#include "mesh.hpp"

namespace shiftbench {

/// Target objects are normalized so their largest extent equals this.
inline constexpr double kObjectSize = 2.0;

struct ProceduralMesh {
  std::string archetype;
  int variant = 0;
};

struct MeshFile {
  std::string path;
};

using MeshSource = std::variant<ProceduralMesh, MeshFile>;

inline std::string describe(const MeshSource& src) {
  if (const auto* p = std::get_if<ProceduralMesh>(&src))
    return concat("procedural:", p->archetype, "#", p->variant);
  return "file:" + std::get<MeshFile>(src).path;
}

namespace archetype {

using prim::box;
using prim::cylinder;
using prim::ellipsoid;
using prim::limb;

struct Palette {
  Vec3 body, accent, dark;
};

// Body along z, facing +z.
struct QuadrupedShape {
  double body_len, body_h, body_w, leg_len, leg_r, neck_len, head_r, tail_len;
  bool horns = false, long_ears = false, fluffy = false;
  Palette colors;
};

inline Mesh quadruped(const QuadrupedShape& q) {
  Mesh m;
  const double body_y = q.leg_len + q.body_h * 0.5;
  const Vec3 body_c{0, body_y, 0};
  if (q.fluffy) {
    m.append(ellipsoid(body_c, {q.body_w * 0.65, q.body_h * 0.62, q.body_len * 0.55}, q.colors.body, 12, 8));
    for (int i = -1; i <= 1; ++i)
      m.append(ellipsoid(body_c + Vec3{0, q.body_h * 0.35, i * q.body_len * 0.28},
                         {q.body_w * 0.45, q.body_h * 0.3, q.body_len * 0.22}, q.colors.body, 8, 6));
  } else {
    m.append(ellipsoid(body_c, {q.body_w * 0.5, q.body_h * 0.5, q.body_len * 0.5}, q.colors.body));
  }
  for (int sx : {-1, 1})
    for (int sz : {-1, 1}) {
      const Vec3 top{sx * q.body_w * 0.3, q.leg_len + q.body_h * 0.2, sz * q.body_len * 0.32};
      m.append(limb(top, {top.x, 0, top.z}, q.leg_r, q.colors.accent, 8));
      m.append(box({top.x, q.leg_r * 0.5, top.z + q.leg_r * 0.3}, {q.leg_r * 1.1, q.leg_r * 0.5, q.leg_r * 1.4}, q.colors.dark));
    }
  const Vec3 neck_base{0, body_y + q.body_h * 0.25, q.body_len * 0.42};
  const Vec3 neck_top = neck_base + Vec3{0, q.neck_len * 0.8, q.neck_len * 0.6};
  m.append(limb(neck_base, neck_top, q.head_r * 0.55, q.colors.body, 8));
  m.append(ellipsoid(neck_top + Vec3{0, 0, q.head_r * 0.4}, {q.head_r * 0.8, q.head_r * 0.85, q.head_r * 1.2}, q.colors.body));
  m.append(ellipsoid(neck_top + Vec3{0, -q.head_r * 0.25, q.head_r * 1.35}, {q.head_r * 0.45, q.head_r * 0.4, q.head_r * 0.45}, q.colors.dark, 8, 6));
  for (int sx : {-1, 1}) {
    const Vec3 ear = neck_top + Vec3{sx * q.head_r * 0.55, q.head_r * 0.75, q.head_r * 0.1};
    if (q.long_ears)
      m.append(ellipsoid(ear + Vec3{sx * q.head_r * 0.2, -q.head_r * 0.4, 0}, {q.head_r * 0.18, q.head_r * 0.55, q.head_r * 0.3}, q.colors.accent, 8, 6));
    else
      m.append(ellipsoid(ear, {q.head_r * 0.22, q.head_r * 0.35, q.head_r * 0.15}, q.colors.accent, 8, 6));
    if (q.horns)
      m.append(limb(ear, ear + Vec3{sx * q.head_r * 0.6, q.head_r * 0.5, 0}, q.head_r * 0.1, {0.9, 0.88, 0.8}, 6));
    m.append(ellipsoid(neck_top + Vec3{sx * q.head_r * 0.35, q.head_r * 0.2, q.head_r * 1.0}, {q.head_r * 0.12, q.head_r * 0.12, q.head_r * 0.08}, {0.05, 0.05, 0.05}, 6, 4));
  }
  if (q.tail_len > 0) {
    const Vec3 tail_base{0, body_y + q.body_h * 0.2, -q.body_len * 0.48};
    m.append(limb(tail_base, tail_base + Vec3{0, q.tail_len * 0.3, -q.tail_len}, q.leg_r * 0.45, q.colors.accent, 6));
  }
  return m;
}

struct WheeledShape {
  double length, width, body_h, cabin_len, cabin_h, cabin_offset, wheel_r;
  int axles = 2;
  bool split_cargo = false;  // truck: separate cab and cargo box
  Palette colors;
};

inline Mesh wheeled(const WheeledShape& w) {
  Mesh m;
  const double base = w.wheel_r * 0.9;
  const Vec3 glass{0.25, 0.35, 0.45};
  if (w.split_cargo) {
    const double cab_len = w.length * 0.28;
    m.append(box({0, base + w.body_h * 0.55, w.length * 0.5 - cab_len * 0.5},
                 {w.width * 0.5, w.body_h * 0.55, cab_len * 0.5}, w.colors.body));
    m.append(box({0, base + w.body_h * 0.8, w.length * 0.5 - 0.02}, {w.width * 0.42, w.body_h * 0.22, 0.03}, glass));
    m.append(box({0, base + w.cabin_h * 0.5 + 0.05, -cab_len * 0.55},
                 {w.width * 0.52, w.cabin_h * 0.5, (w.length - cab_len) * 0.5}, w.colors.accent));
  } else {
    m.append(box({0, base + w.body_h * 0.5, 0}, {w.width * 0.5, w.body_h * 0.5, w.length * 0.5}, w.colors.body));
    if (w.cabin_h > 0) {
      m.append(box({0, base + w.body_h + w.cabin_h * 0.5, w.cabin_offset},
                   {w.width * 0.45, w.cabin_h * 0.5, w.cabin_len * 0.5}, glass));
      m.append(box({0, base + w.body_h + w.cabin_h + 0.02, w.cabin_offset},
                   {w.width * 0.46, 0.03, w.cabin_len * 0.48}, w.colors.body));
    } else {
      // window band along the sides
      for (int sx : {-1, 1})
        m.append(box({sx * (w.width * 0.5 + 0.005), base + w.body_h * 0.7, 0},
                     {0.01, w.body_h * 0.13, w.length * 0.42}, glass));
      m.append(box({0, base + w.body_h * 0.7, w.length * 0.5 + 0.005}, {w.width * 0.4, w.body_h * 0.15, 0.01}, glass));
    }
  }
  for (int sx : {-1, 1}) {
    for (int a = 0; a < w.axles; ++a) {
      const double z = w.length * (0.36 - 0.72 * a / std::max(1, w.axles - 1));
      m.append(cylinder({sx * w.width * 0.47, w.wheel_r, z}, w.wheel_r, w.width * 0.07, 0, w.colors.dark, 12));
    }
    m.append(box({sx * w.width * 0.35, base + w.body_h * 0.45, w.length * 0.5 + 0.01}, {w.width * 0.08, w.body_h * 0.08, 0.02}, {0.95, 0.95, 0.8}));
  }
  return m;
}

struct TwoWheelShape {
  double wheelbase, wheel_r, tire_w, frame_r, seat_h;
  bool motor = false;
  Palette colors;
};

inline Mesh two_wheeler(const TwoWheelShape& t) {
  Mesh m;
  const double zf = t.wheelbase * 0.5, zr = -t.wheelbase * 0.5;
  for (double z : {zf, zr}) {
    m.append(cylinder({0, t.wheel_r, z}, t.wheel_r, t.tire_w, 0, t.colors.dark, 16));
    m.append(cylinder({0, t.wheel_r, z}, t.wheel_r * 0.35, t.tire_w * 1.3, 0, t.colors.accent, 10));
  }
  const Vec3 hub_f{0, t.wheel_r, zf}, hub_r{0, t.wheel_r, zr};
  const Vec3 seat{0, t.seat_h, zr * 0.35};
  const Vec3 bar{0, t.seat_h * 1.1, zf * 0.75};
  const Vec3 crank{0, t.wheel_r, 0};
  if (t.motor) {
    m.append(ellipsoid({0, t.wheel_r * 1.25, 0}, {t.tire_w * 3.2, t.wheel_r * 0.65, t.wheelbase * 0.38}, t.colors.body, 12, 8));
    m.append(ellipsoid({0, t.seat_h * 0.98, zr * 0.3}, {t.tire_w * 2.2, t.wheel_r * 0.18, t.wheelbase * 0.22}, t.colors.dark, 10, 6));
    m.append(cylinder({t.tire_w * 2.5, t.wheel_r * 0.7, zr * 0.6}, t.wheel_r * 0.12, t.wheelbase * 0.2, 2, {0.7, 0.7, 0.72}, 8));
  } else {
    m.append(limb(crank, seat, t.frame_r, t.colors.body));
    m.append(limb(seat, bar, t.frame_r, t.colors.body));
    m.append(limb(crank, bar, t.frame_r, t.colors.body));
    m.append(limb(crank, hub_r, t.frame_r, t.colors.body));
    m.append(limb(seat, hub_r, t.frame_r, t.colors.body));
    m.append(box(seat + Vec3{0, t.frame_r * 2, 0}, {t.tire_w * 1.6, t.frame_r, t.wheelbase * 0.1}, t.colors.dark));
  }
  m.append(limb(bar, hub_f, t.frame_r, t.colors.accent));
  m.append(limb(bar + Vec3{-t.wheel_r * 0.45, 0, 0}, bar + Vec3{t.wheel_r * 0.45, 0, 0}, t.frame_r * 0.9, t.colors.dark));
  return m;
}

inline Mesh airplane(double fuselage_len, double fuselage_r, double span,
                     double tail_h, bool high_wing, const Palette& c) {
  Mesh m;
  const double y = fuselage_r + fuselage_len * 0.08;
  m.append(cylinder({0, y, 0}, fuselage_r, fuselage_len * 0.5, 2, c.body, 16));
  m.append(ellipsoid({0, y, fuselage_len * 0.5}, {fuselage_r, fuselage_r, fuselage_r * 1.6}, c.body));
  m.append(ellipsoid({0, y + fuselage_r * 0.5, fuselage_len * 0.42}, {fuselage_r * 0.7, fuselage_r * 0.4, fuselage_r * 0.8}, {0.2, 0.3, 0.4}, 10, 6));
  const double wy = high_wing ? y + fuselage_r * 0.8 : y - fuselage_r * 0.4;
  m.append(box({0, wy, fuselage_len * 0.05}, {span * 0.5, fuselage_r * 0.08, fuselage_len * 0.11}, c.accent));
  m.append(box({0, y + fuselage_r * 0.3, -fuselage_len * 0.45}, {span * 0.18, fuselage_r * 0.06, fuselage_len * 0.06}, c.accent));
  m.append(box({0, y + fuselage_r + tail_h * 0.5, -fuselage_len * 0.46}, {fuselage_r * 0.06, tail_h * 0.5, fuselage_len * 0.07}, c.accent));
  for (int sx : {-1, 1})
    m.append(cylinder({sx * span * 0.22, wy - fuselage_r * 0.35, fuselage_len * 0.08}, fuselage_r * 0.3, fuselage_len * 0.09, 2, c.dark, 10));
  for (double z : {fuselage_len * 0.3, -fuselage_len * 0.05})
    for (int sx : (z > 0 ? std::vector<int>{0} : std::vector<int>{-1, 1})) {
      const Vec3 top{sx * fuselage_r * 0.8, y - fuselage_r * 0.8, z};
      m.append(limb(top, {top.x, fuselage_len * 0.03, z}, fuselage_r * 0.06, c.dark, 6));
      m.append(cylinder({top.x, fuselage_len * 0.03, z}, fuselage_len * 0.03, fuselage_r * 0.08, 0, c.dark, 8));
    }
  return m;
}

inline Mesh bird(double body_len, double leg_len, double wing_span, bool crest,
                 const Palette& c) {
  Mesh m;
  const double y = leg_len + body_len * 0.3;
  m.append(ellipsoid({0, y, 0}, {body_len * 0.28, body_len * 0.3, body_len * 0.5}, c.body));
  m.append(ellipsoid({0, y + body_len * 0.35, body_len * 0.42}, {body_len * 0.2, body_len * 0.2, body_len * 0.2}, c.body));
  m.append(limb({0, y + body_len * 0.33, body_len * 0.58}, {0, y + body_len * 0.3, body_len * 0.8}, body_len * 0.05, {0.95, 0.7, 0.1}, 6));
  for (int sx : {-1, 1}) {
    m.append(ellipsoid({sx * (body_len * 0.25 + wing_span * 0.2), y + body_len * 0.08, -body_len * 0.05},
                       {wing_span * 0.25, body_len * 0.05, body_len * 0.32}, c.accent, 10, 6));
    m.append(limb({sx * body_len * 0.1, y - body_len * 0.2, 0}, {sx * body_len * 0.1, 0, body_len * 0.05}, body_len * 0.025, {0.9, 0.6, 0.1}, 6));
    m.append(ellipsoid({sx * body_len * 0.12, y + body_len * 0.4, body_len * 0.55}, {body_len * 0.04, body_len * 0.04, body_len * 0.03}, {0.02, 0.02, 0.02}, 6, 4));
  }
  m.append(box({0, y + body_len * 0.05, -body_len * 0.6}, {body_len * 0.15, body_len * 0.03, body_len * 0.22}, c.dark));
  if (crest)
    m.append(ellipsoid({0, y + body_len * 0.58, body_len * 0.38}, {body_len * 0.04, body_len * 0.12, body_len * 0.1}, c.accent, 6, 5));
  return m;
}

inline Mesh human(double height, double build, bool arms_raised, const Palette& c) {
  Mesh m;
  const double leg = height * 0.47, torso = height * 0.32, head_r = height * 0.065;
  const double hip_w = height * 0.09 * build;
  for (int sx : {-1, 1}) {
    m.append(limb({sx * hip_w * 0.55, leg, 0}, {sx * hip_w * 0.6, height * 0.02, 0}, height * 0.035 * build, c.accent, 8));
    m.append(box({sx * hip_w * 0.6, height * 0.015, height * 0.03}, {height * 0.035, height * 0.015, height * 0.06}, c.dark));
    const Vec3 shoulder{sx * hip_w * 1.55, leg + torso * 0.92, 0};
    const Vec3 hand = arms_raised && sx > 0 ? shoulder + Vec3{sx * height * 0.1, height * 0.28, height * 0.05}
                                            : shoulder + Vec3{sx * height * 0.05, -height * 0.33, height * 0.03};
    m.append(limb(shoulder, hand, height * 0.028 * build, c.body, 8));
    m.append(ellipsoid(hand, {height * 0.03, height * 0.035, height * 0.03}, {0.85, 0.68, 0.55}, 6, 5));
  }
  m.append(box({0, leg + torso * 0.5, 0}, {hip_w * 1.45, torso * 0.5, height * 0.065 * build}, c.body));
  m.append(limb({0, leg + torso, 0}, {0, leg + torso + height * 0.04, 0}, height * 0.025, {0.85, 0.68, 0.55}, 6));
  m.append(ellipsoid({0, leg + torso + height * 0.04 + head_r, 0}, {head_r * 0.9, head_r, head_r * 0.95}, {0.85, 0.68, 0.55}));
  m.append(ellipsoid({0, leg + torso + height * 0.04 + head_r * 1.45, -head_r * 0.15}, {head_r * 0.95, head_r * 0.5, head_r * 0.95}, c.dark, 10, 6));
  return m;
}

inline Mesh build(const std::string& name, int v) {
  const int k = ((v % 3) + 3) % 3;
  auto pick = [k](auto a, auto b, auto c) { return k == 0 ? a : (k == 1 ? b : c); };
  if (name == "car")
    return wheeled({pick(4.2, 4.6, 3.8), 1.8, pick(0.65, 0.6, 0.8), pick(2.0, 2.6, 1.8), pick(0.55, 0.5, 0.6), pick(-0.2, -0.3, 0.0), 0.36, 2, false,
                    {pick(Vec3{0.75, 0.1, 0.1}, Vec3{0.15, 0.25, 0.7}, Vec3{0.85, 0.85, 0.82}), {0.2, 0.2, 0.22}, {0.06, 0.06, 0.06}}});
  if (name == "bus")
    return wheeled({pick(11.0, 9.0, 12.0), 2.5, pick(2.6, 2.4, 2.9), 0, 0, 0, 0.5, pick(2, 2, 3), false,
                    {pick(Vec3{0.9, 0.75, 0.1}, Vec3{0.8, 0.15, 0.12}, Vec3{0.2, 0.5, 0.3}), {0.3, 0.3, 0.3}, {0.06, 0.06, 0.06}}});
  if (name == "truck")
    return wheeled({pick(7.0, 8.5, 6.0), 2.4, pick(1.6, 1.8, 1.5), 0, pick(2.4, 2.9, 2.0), 0, 0.5, pick(2, 3, 2), true,
                    {pick(Vec3{0.1, 0.3, 0.6}, Vec3{0.85, 0.85, 0.85}, Vec3{0.6, 0.12, 0.1}), pick(Vec3{0.8, 0.8, 0.78}, Vec3{0.5, 0.35, 0.2}, Vec3{0.4, 0.42, 0.45}), {0.06, 0.06, 0.06}}});
  if (name == "bike")
    return two_wheeler({pick(1.05, 1.0, 1.1), pick(0.34, 0.33, 0.36), 0.02, 0.022, pick(0.95, 0.9, 1.0), false,
                        {pick(Vec3{0.1, 0.5, 0.8}, Vec3{0.8, 0.1, 0.2}, Vec3{0.15, 0.15, 0.15}), {0.7, 0.7, 0.72}, {0.05, 0.05, 0.05}}});
  if (name == "motorcycle")
    return two_wheeler({pick(1.45, 1.55, 1.35), pick(0.32, 0.34, 0.3), 0.07, 0.04, pick(0.8, 0.85, 0.75), true,
                        {pick(Vec3{0.1, 0.1, 0.1}, Vec3{0.75, 0.3, 0.05}, Vec3{0.1, 0.4, 0.15}), {0.72, 0.72, 0.74}, {0.04, 0.04, 0.04}}});
  if (name == "airplane")
    return airplane(pick(30.0, 38.0, 12.0), pick(1.9, 2.3, 0.8), pick(28.0, 34.0, 11.0), pick(5.0, 6.5, 2.2), k == 2,
                    {pick(Vec3{0.92, 0.92, 0.94}, Vec3{0.85, 0.87, 0.9}, Vec3{0.9, 0.85, 0.2}), pick(Vec3{0.7, 0.72, 0.75}, Vec3{0.2, 0.3, 0.6}, Vec3{0.8, 0.15, 0.1}), {0.2, 0.2, 0.22}});
  if (name == "bird")
    return bird(pick(0.3, 0.25, 0.5), pick(0.12, 0.08, 0.25), pick(0.25, 0.2, 0.4), k == 1,
                {pick(Vec3{0.45, 0.3, 0.2}, Vec3{0.2, 0.35, 0.75}, Vec3{0.9, 0.9, 0.9}), pick(Vec3{0.35, 0.22, 0.15}, Vec3{0.1, 0.2, 0.5}, Vec3{0.2, 0.2, 0.2}), {0.15, 0.12, 0.1}});
  if (name == "human")
    return human(pick(1.75, 1.6, 1.85), pick(1.0, 0.9, 1.2), k == 1,
                 {pick(Vec3{0.2, 0.35, 0.7}, Vec3{0.8, 0.2, 0.2}, Vec3{0.25, 0.5, 0.25}), pick(Vec3{0.15, 0.15, 0.25}, Vec3{0.3, 0.25, 0.2}, Vec3{0.1, 0.1, 0.1}), {0.15, 0.1, 0.05}});
  if (name == "cat")
    return quadruped({pick(0.45, 0.5, 0.42), 0.16, 0.14, pick(0.2, 0.22, 0.18), 0.025, 0.08, 0.07, pick(0.3, 0.32, 0.25), false, false, false,
                      {pick(Vec3{0.85, 0.5, 0.2}, Vec3{0.2, 0.2, 0.22}, Vec3{0.75, 0.72, 0.68}), pick(Vec3{0.7, 0.4, 0.15}, Vec3{0.15, 0.15, 0.17}, Vec3{0.5, 0.45, 0.4}), {0.9, 0.7, 0.7}}});
  if (name == "dog")
    return quadruped({pick(0.75, 0.65, 0.55), pick(0.3, 0.28, 0.22), 0.24, pick(0.4, 0.42, 0.25), 0.045, 0.16, 0.12, pick(0.3, 0.25, 0.2), false, k != 1, false,
                      {pick(Vec3{0.85, 0.7, 0.4}, Vec3{0.15, 0.1, 0.08}, Vec3{0.6, 0.6, 0.62}), pick(Vec3{0.75, 0.6, 0.35}, Vec3{0.55, 0.3, 0.15}, Vec3{0.9, 0.9, 0.9}), {0.1, 0.08, 0.06}}});
  if (name == "bear")
    return quadruped({pick(1.8, 1.6, 2.0), pick(0.9, 0.8, 1.0), pick(0.8, 0.7, 0.9), pick(0.55, 0.5, 0.6), 0.14, 0.2, 0.28, 0.08, false, false, false,
                      {pick(Vec3{0.35, 0.22, 0.12}, Vec3{0.08, 0.07, 0.07}, Vec3{0.93, 0.92, 0.88}), pick(Vec3{0.3, 0.18, 0.1}, Vec3{0.06, 0.05, 0.05}, Vec3{0.85, 0.84, 0.8}), {0.05, 0.04, 0.04}}});
  if (name == "horse")
    return quadruped({pick(2.0, 1.9, 1.7), 0.75, 0.5, pick(1.0, 1.05, 0.85), 0.08, 0.75, 0.25, 0.7, false, false, false,
                      {pick(Vec3{0.45, 0.25, 0.12}, Vec3{0.9, 0.88, 0.85}, Vec3{0.1, 0.08, 0.08}), pick(Vec3{0.2, 0.12, 0.06}, Vec3{0.7, 0.68, 0.65}, Vec3{0.08, 0.06, 0.06}), {0.05, 0.04, 0.04}}});
  if (name == "cow")
    return quadruped({pick(2.2, 2.0, 2.3), 0.95, 0.75, pick(0.75, 0.7, 0.8), 0.1, 0.35, 0.28, 0.6, true, false, false,
                      {pick(Vec3{0.92, 0.92, 0.9}, Vec3{0.45, 0.25, 0.15}, Vec3{0.12, 0.1, 0.1}), pick(Vec3{0.1, 0.1, 0.1}, Vec3{0.9, 0.88, 0.85}, Vec3{0.85, 0.85, 0.83}), {0.75, 0.55, 0.5}}});
  if (name == "sheep")
    return quadruped({pick(1.2, 1.1, 1.3), pick(0.6, 0.55, 0.65), 0.55, pick(0.4, 0.35, 0.45), 0.05, 0.18, 0.16, 0.1, k == 2, false, true,
                      {pick(Vec3{0.93, 0.92, 0.86}, Vec3{0.85, 0.82, 0.75}, Vec3{0.3, 0.28, 0.26}), {0.15, 0.13, 0.12}, {0.1, 0.09, 0.08}}});
  throw Error(concat("no procedural archetype for '", name, "'"));
}

}  // namespace archetype

struct Category {
  std::string name;
  std::vector<MeshSource> variants;
};

class CategoryRegistry {
 public:
  static constexpr int kProceduralVariants = 3;

  /// The fourteen default categories, three procedural variants each.
  static CategoryRegistry default_registry() {
    CategoryRegistry r;
    for (const char* name : {"car", "airplane", "bike", "motorcycle", "cat", "dog", "bear",
                             "horse", "cow", "sheep", "bird", "human", "bus", "truck"}) {
      Category c{name, {}};
      for (int v = 0; v < kProceduralVariants; ++v)
        c.variants.push_back(ProceduralMesh{name, v});
      r.categories_.push_back(std::move(c));
    }
    return r;
  }

  const std::vector<Category>& categories() const { return categories_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& c : categories_) out.push_back(c.name);
    return out;
  }

  const Category& at(std::string_view name) const {
    for (const auto& c : categories_)
      if (c.name == name) return c;
    throw Error(concat("unknown category '", name, "'"));
  }

  bool contains(std::string_view name) const {
    for (const auto& c : categories_)
      if (c.name == name) return true;
    return false;
  }

  /// Appends a file-backed variant, creating the category if needed.
  void add_mesh_file(const std::string& category, const std::string& path) {
    for (auto& c : categories_)
      if (c.name == category) {
        c.variants.push_back(MeshFile{path});
        return;
      }
    categories_.push_back({category, {MeshFile{path}}});
  }

  /// Normalized target mesh for one variant.
  Mesh build(std::string_view category, std::size_t variant) const {
    const auto& cat = at(category);
    if (variant >= cat.variants.size())
      throw Error(concat("category '", category, "' has no variant ", variant));
    const auto& src = cat.variants[variant];
    Mesh raw = std::holds_alternative<ProceduralMesh>(src)
                   ? archetype::build(std::get<ProceduralMesh>(src).archetype,
                                      std::get<ProceduralMesh>(src).variant)
                   : load_mesh_file(std::get<MeshFile>(src).path);
    return raw.normalized(kObjectSize);
  }

 private:
  std::vector<Category> categories_;
};

}  // namespace shiftbench
