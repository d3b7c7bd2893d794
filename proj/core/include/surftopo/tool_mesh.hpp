#pragma once

#include "surftopo/geometry.hpp"
#include "surftopo/tool.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace surftopo {

// Triangle mesh of a cutter in the tool frame (axis +Z, tip at origin, mm)
// with a bounding-volume hierarchy for line queries. Immutable after build.
class ToolMesh {
 public:
  using Triangle = std::array<std::uint32_t, 3>;

  ToolMesh() = default;
  ToolMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles, double chord_error = 0.0);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  double chord_error() const { return chord_error_; }
  // Zero-area triangles dropped at construction.
  std::size_t degenerate_count() const { return degenerate_; }
  bool empty() const { return triangles_.empty(); }

  // Nearest triangle crossing with t >= 0. Lines coplanar with a triangle do
  // not hit it.
  std::optional<LocalHit> intersect_local(const Vec3& p, const Vec3& d) const;

 private:
  struct Node {
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;
    std::uint32_t left = 0;   // left child, or first triangle for a leaf
    std::uint32_t right = 0;  // right child (inner nodes)
    std::uint32_t count = 0;  // triangles in a leaf, 0 for inner nodes
  };

  void build();
  std::uint32_t build_node(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Node> nodes_;
  double chord_error_ = 0.0;
  std::size_t degenerate_ = 0;
};

// Tessellates the filleted cutter (flat bottom, fillet, barrel, cap) so that
// no point of any facet deviates from the analytic surface by more than
// chord_error. Throws DomainError for chord_error <= 0 and ResourceError when
// the triangle count would exceed max_triangles.
ToolMesh mesh_tool(const ToolDefinition& tool, double chord_error = 1e-4,
                   std::size_t max_triangles = 5'000'000);

// ASCII STL triangle soup. Facet normals are ignored; units mm; tool frame.
ToolMesh read_stl_ascii(const std::filesystem::path& path);
void write_stl_ascii(const ToolMesh& mesh, const std::filesystem::path& path);

std::optional<CutterHit> line_mesh_intersection(const Vec3& line_origin, const Vec3& line_dir,
                                                const ToolState& state, const ToolMesh& mesh);

}  // namespace surftopo
