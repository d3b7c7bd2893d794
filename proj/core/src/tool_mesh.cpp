#include "surftopo/tool_mesh.hpp"

#include "surftopo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace surftopo {

ToolMesh::ToolMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles, double chord_error)
    : vertices_(std::move(vertices)), chord_error_(chord_error) {
  triangles_.reserve(triangles.size());
  for (const Triangle& tri : triangles) {
    const Vec3& a = vertices_.at(tri[0]);
    const Vec3& b = vertices_.at(tri[1]);
    const Vec3& c = vertices_.at(tri[2]);
    if ((b - a).cross(c - a).norm() <= 1e-18) {
      ++degenerate_;
      continue;
    }
    triangles_.push_back(tri);
  }
  build();
}

void ToolMesh::build() {
  nodes_.clear();
  if (triangles_.empty()) return;
  nodes_.reserve(triangles_.size() / 2 + 1);
  build_node(0, static_cast<std::uint32_t>(triangles_.size()));
}

std::uint32_t ToolMesh::build_node(std::uint32_t begin, std::uint32_t end) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    for (std::uint32_t v : triangles_[i]) {
      lo = lo.cwiseMin(vertices_[v]);
      hi = hi.cwiseMax(vertices_[v]);
    }
  }
  nodes_[index].lo = lo;
  nodes_[index].hi = hi;

  constexpr std::uint32_t kLeafSize = 4;
  if (end - begin <= kLeafSize) {
    nodes_[index].left = begin;
    nodes_[index].count = end - begin;
    return index;
  }

  int axis = 0;
  const Vec3 extent = hi - lo;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;
  auto centroid = [&](const Triangle& t) {
    return vertices_[t[0]][axis] + vertices_[t[1]][axis] + vertices_[t[2]][axis];
  };
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(triangles_.begin() + begin, triangles_.begin() + mid, triangles_.begin() + end,
                   [&](const Triangle& a, const Triangle& b) { return centroid(a) < centroid(b); });
  const std::uint32_t left = build_node(begin, mid);
  const std::uint32_t right = build_node(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  nodes_[index].count = 0;
  return index;
}

namespace {

// Slab test; returns the entry parameter or +inf on a miss.
double ray_box(const Vec3& p, const Vec3& inv_d, const Vec3& lo, const Vec3& hi, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    double ta = (lo[k] - p[k]) * inv_d[k];
    double tb = (hi[k] - p[k]) * inv_d[k];
    if (std::isnan(ta) || std::isnan(tb)) {
      // Zero direction component with the origin on a slab plane.
      if (p[k] < lo[k] || p[k] > hi[k]) return std::numeric_limits<double>::infinity();
      continue;
    }
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0;
}

}  // namespace

std::optional<LocalHit> ToolMesh::intersect_local(const Vec3& p, const Vec3& d) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv_d(1.0 / d.x(), 1.0 / d.y(), 1.0 / d.z());
  double best_t = std::numeric_limits<double>::infinity();
  std::uint32_t best_tri = 0;

  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!std::isfinite(ray_box(p, inv_d, node.lo, node.hi, best_t))) continue;
    if (node.count == 0) {
      stack[top++] = node.left;
      stack[top++] = node.right;
      continue;
    }
    for (std::uint32_t i = node.left; i < node.left + node.count; ++i) {
      // Moller-Trumbore.
      const Triangle& tri = triangles_[i];
      const Vec3& v0 = vertices_[tri[0]];
      const Vec3 e1 = vertices_[tri[1]] - v0;
      const Vec3 e2 = vertices_[tri[2]] - v0;
      const Vec3 pv = d.cross(e2);
      const double det = e1.dot(pv);
      if (std::abs(det) <= 1e-14 * e1.norm() * e2.norm()) continue;
      const double inv_det = 1.0 / det;
      const Vec3 tv = p - v0;
      const double u = tv.dot(pv) * inv_det;
      if (u < 0.0 || u > 1.0) continue;
      const Vec3 qv = tv.cross(e1);
      const double v = d.dot(qv) * inv_det;
      if (v < 0.0 || u + v > 1.0) continue;
      const double t = e2.dot(qv) * inv_det;
      if (t >= 0.0 && t < best_t) {
        best_t = t;
        best_tri = i;
      }
    }
  }
  if (!std::isfinite(best_t)) return std::nullopt;
  const Triangle& tri = triangles_[best_tri];
  Vec3 n = (vertices_[tri[1]] - vertices_[tri[0]]).cross(vertices_[tri[2]] - vertices_[tri[0]]);
  n.normalize();
  if (n.dot(d) > 0.0) n = -n;
  return LocalHit{best_t, p + best_t * d, n};
}

ToolMesh mesh_tool(const ToolDefinition& tool, double chord_error, std::size_t max_triangles) {
  if (!(chord_error > 0.0)) throw DomainError("mesh_tool: chord_error must be positive");
  tool.validate();
  const double R = tool.R;
  const double r = tool.r;
  const double Rm = tool.R - tool.r;
  const double H = tool.flute_height;

  // Half of the budget goes to the profile direction, half to the azimuthal
  // direction; a facet's deviation is bounded by the sum of the two sagittas.
  const double budget = 0.5 * chord_error;
  auto segments_for = [&](double radius, double span) -> double {
    if (budget >= radius) return 2.0;
    const double max_step = 2.0 * std::acos(1.0 - budget / radius);
    return std::max(2.0, std::ceil(span / max_step));
  };
  const double n_theta_d = std::max(3.0, segments_for(R, kTwoPi));
  const double n_fillet_d = segments_for(r, kPi / 2.0);
  // fan + fillet quads + barrel quad + cap fan
  const double tri_estimate = n_theta_d * (2.0 + 2.0 * n_fillet_d + 2.0);
  if (tri_estimate > static_cast<double>(max_triangles)) {
    throw ResourceError("mesh_tool: chord error " + std::to_string(chord_error) +
                        " mm needs ~" + std::to_string(static_cast<long long>(tri_estimate)) +
                        " triangles, above the cap of " + std::to_string(max_triangles));
  }
  const auto n_theta = static_cast<std::uint32_t>(n_theta_d);
  const auto n_fillet = static_cast<std::uint32_t>(n_fillet_d);

  // Profile polyline (rho, z) from the bottom ring outwards and up.
  std::vector<std::pair<double, double>> profile;
  for (std::uint32_t k = 0; k <= n_fillet; ++k) {
    const double psi = (kPi / 2.0) * k / n_fillet;
    profile.emplace_back(Rm + r * std::sin(psi), r - r * std::cos(psi));
  }
  profile.emplace_back(R, H);

  std::vector<Vec3> verts;
  std::vector<ToolMesh::Triangle> tris;
  const auto bottom_center = static_cast<std::uint32_t>(verts.size());
  verts.emplace_back(0.0, 0.0, 0.0);
  const auto ring0 = static_cast<std::uint32_t>(verts.size());
  for (const auto& [rho, z] : profile) {
    for (std::uint32_t j = 0; j < n_theta; ++j) {
      const double th = kTwoPi * j / n_theta;
      verts.emplace_back(rho * std::cos(th), rho * std::sin(th), z);
    }
  }
  const auto top_center = static_cast<std::uint32_t>(verts.size());
  verts.emplace_back(0.0, 0.0, H);

  auto ring_vertex = [&](std::size_t ring, std::uint32_t j) {
    return static_cast<std::uint32_t>(ring0 + ring * n_theta + (j % n_theta));
  };
  for (std::uint32_t j = 0; j < n_theta; ++j) {
    if (Rm > 0.0) tris.push_back({bottom_center, ring_vertex(0, j + 1), ring_vertex(0, j)});
    for (std::size_t k = 0; k + 1 < profile.size(); ++k) {
      tris.push_back({ring_vertex(k, j), ring_vertex(k, j + 1), ring_vertex(k + 1, j + 1)});
      tris.push_back({ring_vertex(k, j), ring_vertex(k + 1, j + 1), ring_vertex(k + 1, j)});
    }
    tris.push_back({top_center, ring_vertex(profile.size() - 1, j),
                    ring_vertex(profile.size() - 1, j + 1)});
  }
  return ToolMesh(std::move(verts), std::move(tris), chord_error);
}

ToolMesh read_stl_ascii(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tool mesh '" + path.string() + "'");
  std::vector<Vec3> verts;
  std::vector<ToolMesh::Triangle> tris;
  std::string line;
  std::size_t line_no = 0;
  std::vector<Vec3> pending;
  bool saw_solid = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "solid") {
      saw_solid = true;
    } else if (word == "vertex") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": malformed vertex");
      }
      pending.emplace_back(x, y, z);
    } else if (word == "endloop") {
      if (pending.size() != 3) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": facet loop must have exactly 3 vertices");
      }
      const auto base = static_cast<std::uint32_t>(verts.size());
      verts.insert(verts.end(), pending.begin(), pending.end());
      tris.push_back({base, base + 1, base + 2});
      pending.clear();
    } else if (word == "facet" || word == "outer" || word == "endfacet" || word == "endsolid") {
      // structure only; normals ignored
    } else {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": unexpected token '" +
                       word + "'");
    }
  }
  if (!saw_solid) throw ParseError(path.string() + ": not an ASCII STL file (missing 'solid')");
  return ToolMesh(std::move(verts), std::move(tris));
}

void write_stl_ascii(const ToolMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write tool mesh '" + path.string() + "'");
  out.precision(17);
  out << "solid tool\n";
  for (const auto& tri : mesh.triangles()) {
    const Vec3& a = mesh.vertices()[tri[0]];
    const Vec3& b = mesh.vertices()[tri[1]];
    const Vec3& c = mesh.vertices()[tri[2]];
    const Vec3 n = (b - a).cross(c - a).normalized();
    out << "  facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << "\n    outer loop\n";
    for (const Vec3* v : {&a, &b, &c}) {
      out << "      vertex " << v->x() << ' ' << v->y() << ' ' << v->z() << '\n';
    }
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid tool\n";
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::optional<CutterHit> line_mesh_intersection(const Vec3& line_origin, const Vec3& line_dir,
                                                const ToolState& state, const ToolMesh& mesh) {
  const AxisFrame frame = AxisFrame::from_axis(state.axis);
  const auto hit = mesh.intersect_local(frame.to_local(line_origin - state.tip),
                                        frame.to_local(line_dir));
  if (!hit) return std::nullopt;
  return CutterHit{hit->t, hit_azimuth(hit->point, state.spindle_angle)};
}

}  // namespace surftopo
