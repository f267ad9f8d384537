#pragma once

// Colored triangle soups, a handful of primitive builders, and the plain-text
// mesh loader.
//
// Mesh text format (an OBJ subset plus a color directive):
//   # comment
//   v <x> <y> <z>          vertex; +y is up, the object faces +z
//   c <r> <g> <b>          albedo in [0,1] for the faces that follow
//   f <i> <j> <k> [...]    face over 1-based vertex indices (negative indices
//                          count back from the last vertex); polygons are fan
//                          triangulated; "i/t/n" tokens keep only "i"
// Any other directive (vn, vt, o, g, s, usemtl, mtllib) is ignored.

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "geometry.hpp"

namespace shiftbench {

struct Triangle {
  Vec3 a, b, c;
  Vec3 color{0.7, 0.7, 0.7};
};

struct Bounds {
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::lowest()};

  void add(const Vec3& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  bool empty() const { return lo.x > hi.x; }
  Vec3 center() const { return (lo + hi) * 0.5; }
  Vec3 extent() const { return hi - lo; }
};

struct Mesh {
  std::vector<Triangle> triangles;

  void append(const Mesh& o) {
    triangles.insert(triangles.end(), o.triangles.begin(), o.triangles.end());
  }

  Bounds bounds() const {
    Bounds b;
    for (const auto& t : triangles) {
      b.add(t.a);
      b.add(t.b);
      b.add(t.c);
    }
    return b;
  }

  /// Radius of the smallest origin-centered sphere around `center`.
  double radius_about(const Vec3& center) const {
    double r = 0;
    for (const auto& t : triangles)
      for (const auto* p : {&t.a, &t.b, &t.c})
        r = std::max(r, length(*p - center));
    return r;
  }

  Mesh transformed(const Mat3& rot, const Vec3& offset, double scale = 1.0) const {
    Mesh out = *this;
    for (auto& t : out.triangles) {
      t.a = rot * (t.a * scale) + offset;
      t.b = rot * (t.b * scale) + offset;
      t.c = rot * (t.c * scale) + offset;
    }
    return out;
  }

  /// Recenters on x/z, rests the lowest point on y=0 and scales the largest
  /// extent to `size`.
  Mesh normalized(double size) const {
    const auto b = bounds();
    if (b.empty()) throw Error("cannot normalize an empty mesh");
    const auto e = b.extent();
    const double m = std::max({e.x, e.y, e.z});
    if (!(m > 0)) throw Error("degenerate mesh (zero extent)");
    const double s = size / m;
    const Vec3 shift{-b.center().x, -b.lo.y, -b.center().z};
    Mesh out = *this;
    for (auto& t : out.triangles) {
      t.a = (t.a + shift) * s;
      t.b = (t.b + shift) * s;
      t.c = (t.c + shift) * s;
    }
    return out;
  }
};

namespace prim {

inline void quad(Mesh& m, const Vec3& p0, const Vec3& p1, const Vec3& p2,
                 const Vec3& p3, const Vec3& color) {
  m.triangles.push_back({p0, p1, p2, color});
  m.triangles.push_back({p0, p2, p3, color});
}

/// Box with the given half extents, optionally rotated about its center.
inline Mesh box(const Vec3& center, const Vec3& half, const Vec3& color,
                const Mat3& rot = Mat3::identity()) {
  Mesh m;
  auto P = [&](double sx, double sy, double sz) {
    return center + rot * Vec3{sx * half.x, sy * half.y, sz * half.z};
  };
  quad(m, P(-1, -1, 1), P(1, -1, 1), P(1, 1, 1), P(-1, 1, 1), color);      // +z
  quad(m, P(1, -1, -1), P(-1, -1, -1), P(-1, 1, -1), P(1, 1, -1), color);  // -z
  quad(m, P(1, -1, 1), P(1, -1, -1), P(1, 1, -1), P(1, 1, 1), color);      // +x
  quad(m, P(-1, -1, -1), P(-1, -1, 1), P(-1, 1, 1), P(-1, 1, -1), color);  // -x
  quad(m, P(-1, 1, 1), P(1, 1, 1), P(1, 1, -1), P(-1, 1, -1), color);      // +y
  quad(m, P(-1, -1, -1), P(1, -1, -1), P(1, -1, 1), P(-1, -1, 1), color);  // -y
  return m;
}

/// Capped cylinder along `axis` (0=x, 1=y, 2=z).
inline Mesh cylinder(const Vec3& center, double radius, double half_len,
                     int axis, const Vec3& color, int segments = 14) {
  Mesh m;
  auto P = [&](double ang, double h) {
    const double u = radius * std::cos(ang), v = radius * std::sin(ang);
    switch (axis) {
      case 0: return center + Vec3{h, u, v};
      case 1: return center + Vec3{u, h, v};
      default: return center + Vec3{u, v, h};
    }
  };
  auto C = [&](double h) {
    switch (axis) {
      case 0: return center + Vec3{h, 0, 0};
      case 1: return center + Vec3{0, h, 0};
      default: return center + Vec3{0, 0, h};
    }
  };
  for (int i = 0; i < segments; ++i) {
    const double a0 = 2 * kPi * i / segments, a1 = 2 * kPi * (i + 1) / segments;
    quad(m, P(a0, -half_len), P(a1, -half_len), P(a1, half_len), P(a0, half_len), color);
    m.triangles.push_back({C(half_len), P(a0, half_len), P(a1, half_len), color});
    m.triangles.push_back({C(-half_len), P(a1, -half_len), P(a0, -half_len), color});
  }
  return m;
}

/// Cylinder between two arbitrary points.
inline Mesh limb(const Vec3& from, const Vec3& to, double radius,
                 const Vec3& color, int segments = 10) {
  const Vec3 d = to - from;
  const double len = length(d);
  Mesh m = cylinder({0, 0, 0}, radius, len / 2, 1, color, segments);
  const Vec3 y = normalize(d);
  const Vec3 ref = std::abs(y.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
  const Vec3 x = normalize(cross(ref, y));
  const Vec3 z = cross(x, y);
  // columns are the new basis
  Mat3 rot = Mat3::from_rows(x, y, z).transposed();
  return m.transformed(rot, (from + to) * 0.5);
}

inline Mesh ellipsoid(const Vec3& center, const Vec3& radii, const Vec3& color,
                      int slices = 14, int stacks = 9) {
  Mesh m;
  auto P = [&](int i, int j) {
    const double th = kPi * j / stacks;       // 0..pi from +y
    const double ph = 2 * kPi * i / slices;
    return center + Vec3{radii.x * std::sin(th) * std::cos(ph),
                         radii.y * std::cos(th),
                         radii.z * std::sin(th) * std::sin(ph)};
  };
  for (int j = 0; j < stacks; ++j)
    for (int i = 0; i < slices; ++i) {
      const Vec3 p00 = P(i, j), p10 = P(i + 1, j), p01 = P(i, j + 1), p11 = P(i + 1, j + 1);
      if (j != 0) m.triangles.push_back({p00, p10, p11, color});
      if (j != stacks - 1) m.triangles.push_back({p00, p11, p01, color});
    }
  return m;
}

}  // namespace prim

inline Mesh parse_mesh_text(std::istream& in, const std::string& origin = "<mesh>") {
  std::vector<Vec3> verts;
  Vec3 color{0.7, 0.7, 0.7};
  Mesh mesh;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error(concat(origin, ":", lineno, ": ", what));
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) fail("vertex needs three numbers");
      verts.push_back(v);
    } else if (tag == "c") {
      Vec3 c;
      if (!(ls >> c.x >> c.y >> c.z)) fail("color needs three numbers");
      for (double ch : {c.x, c.y, c.z})
        if (ch < 0 || ch > 1) fail("color channel outside [0,1]");
      color = c;
    } else if (tag == "f") {
      std::vector<std::size_t> idx;
      std::string tok;
      while (ls >> tok) {
        long v = 0;
        try {
          v = std::stol(tok.substr(0, tok.find('/')));
        } catch (const std::exception&) {
          fail("bad face index '" + tok + "'");
        }
        const long n = static_cast<long>(verts.size());
        const long resolved = v < 0 ? n + v : v - 1;
        if (v == 0 || resolved < 0 || resolved >= n)
          fail("face index " + tok + " out of range");
        idx.push_back(static_cast<std::size_t>(resolved));
      }
      if (idx.size() < 3) fail("face needs at least three vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        mesh.triangles.push_back({verts[idx[0]], verts[idx[k]], verts[idx[k + 1]], color});
    }
  }
  if (mesh.triangles.empty()) throw Error(origin + ": mesh has no faces");
  return mesh;
}

inline Mesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(concat("cannot open mesh file '", path, "'"));
  return parse_mesh_text(in, path);
}

}  // namespace shiftbench
