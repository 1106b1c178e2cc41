#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "reconfmag/workspace.hpp"

namespace reconfmag {

namespace {

struct Face {
  std::array<int, 3> v;
  Vec3 normal;  // unit outward normal
  double offset;  // normal . v0
  bool alive;
};

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

// Incremental hull. Points closer than eps to a face plane count as not
// visible, which makes coplanar and duplicate points harmless.
double hull_volume(const std::vector<Vec3>& pts) {
  const int n = static_cast<int>(pts.size());
  if (n < 4) return 0.0;

  Vec3 lo = pts[0], hi = pts[0];
  for (const Vec3& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = (hi - lo).norm();
  if (scale == 0.0) return 0.0;
  const double eps = 1e-10 * scale;

  int i0 = 0;
  for (int i = 1; i < n; ++i)
    if (pts[i].x() < pts[i0].x()) i0 = i;
  int i1 = i0;
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = (pts[i] - pts[i0]).norm();
    if (d > best) best = d, i1 = i;
  }
  if (best <= eps) return 0.0;
  const Vec3 dir = (pts[i1] - pts[i0]).normalized();
  int i2 = i0;
  best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = (pts[i] - pts[i0]).cross(dir).norm();
    if (d > best) best = d, i2 = i;
  }
  if (best <= eps) return 0.0;
  const Vec3 pn = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  int i3 = i0;
  best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(pn.dot(pts[i] - pts[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (best <= eps) return 0.0;

  const Vec3 centre = 0.25 * (pts[i0] + pts[i1] + pts[i2] + pts[i3]);
  std::vector<Face> faces;
  std::unordered_map<std::uint64_t, int> edge_owner;

  auto add_face = [&](int a, int b, int c) {
    Vec3 nrm = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    nrm.normalize();
    Face f{{a, b, c}, nrm, nrm.dot(pts[a]), true};
    const int id = static_cast<int>(faces.size());
    faces.push_back(f);
    edge_owner[edge_key(a, b)] = id;
    edge_owner[edge_key(b, c)] = id;
    edge_owner[edge_key(c, a)] = id;
  };
  auto oriented = [&](int a, int b, int c) {
    const Vec3 nrm = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    if (nrm.dot(centre - pts[a]) > 0.0)
      add_face(a, c, b);
    else
      add_face(a, b, c);
  };
  oriented(i0, i1, i2);
  oriented(i0, i1, i3);
  oriented(i0, i2, i3);
  oriented(i1, i2, i3);

  std::vector<int> visible;
  std::vector<std::pair<int, int>> horizon;
  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    visible.clear();
    for (int f = 0; f < static_cast<int>(faces.size()); ++f)
      if (faces[f].alive && faces[f].normal.dot(pts[p]) - faces[f].offset > eps) visible.push_back(f);
    if (visible.empty()) continue;

    for (int f : visible) faces[f].alive = false;
    horizon.clear();
    for (int f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) {
        const int a = v[e], b = v[(e + 1) % 3];
        auto it = edge_owner.find(edge_key(b, a));
        if (it != edge_owner.end() && faces[it->second].alive) horizon.emplace_back(a, b);
      }
    }
    for (int f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) {
        auto it = edge_owner.find(edge_key(v[e], v[(e + 1) % 3]));
        if (it != edge_owner.end() && it->second == f) edge_owner.erase(it);
      }
    }
    for (const auto& [a, b] : horizon) add_face(a, b, p);
  }

  double vol = 0.0;
  for (const Face& f : faces) {
    if (!f.alive) continue;
    const Vec3 a = pts[f.v[0]] - centre, b = pts[f.v[1]] - centre, c = pts[f.v[2]] - centre;
    vol += a.dot(b.cross(c));
  }
  return std::abs(vol) / 6.0;
}

}  // namespace reconfmag
