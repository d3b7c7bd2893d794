#pragma once

#include "surftopo/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace surftopo {

struct NominalSurface {
  enum class Kind { kPlane, kHyperbolicParaboloid };

  Kind kind = Kind::kPlane;
  double z0 = 0.0;   // plane height, mm
  double k = 50.0;   // hypar warp constant: z = x*y/k, mm

  static NominalSurface plane(double z0) { return {Kind::kPlane, z0, 50.0}; }
  static NominalSurface hypar(double k);

  double height(double x, double y) const;
};

// Unit normal with positive z component.
Vec3 surface_normal(const NominalSurface& surface, double x, double y);

struct GridBounds {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;
};

// N-buffer part model: a uniform XY grid of anchor points on the nominal
// surface, each carrying a line along the local normal and a cut offset c
// (signed distance along the normal from the anchor to the material
// boundary). Cell (i, j) is stored at j * nx + i.
class LineNet {
 public:
  LineNet() = default;

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }
  double x0() const { return bounds_.xmin; }
  double y0() const { return bounds_.ymin; }
  double spacing_x() const { return gx_; }
  double spacing_y() const { return gy_; }
  const GridBounds& bounds() const { return bounds_; }
  double stock() const { return stock_; }
  const NominalSurface& surface() const { return surface_; }

  std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
  double x(std::size_t i) const { return bounds_.xmin + static_cast<double>(i) * gx_; }
  double y(std::size_t j) const { return bounds_.ymin + static_cast<double>(j) * gy_; }

  const Vec3& anchor(std::size_t idx) const { return anchors_[idx]; }
  const Vec3& normal(std::size_t idx) const { return normals_[idx]; }

  // True when every line shares one direction and the anchors are coplanar
  // (plane nets); enables the engine's rasterised fast path.
  bool is_planar() const { return planar_; }

  std::vector<double>& offsets() { return offsets_; }
  const std::vector<double>& offsets() const { return offsets_; }
  std::vector<std::uint8_t>& touched() { return touched_; }
  const std::vector<std::uint8_t>& touched() const { return touched_; }

  friend LineNet make_plane_net(double z0, const GridBounds& bounds, std::size_t nx,
                                std::size_t ny, double stock);
  friend LineNet make_hypar_net(double k, const GridBounds& bounds, std::size_t nx,
                                std::size_t ny, double stock);

 private:
  void init_grid(const GridBounds& bounds, std::size_t nx, std::size_t ny, double stock);

  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  GridBounds bounds_;
  double gx_ = 0.0;
  double gy_ = 0.0;
  double stock_ = 0.0;
  bool planar_ = false;
  NominalSurface surface_;
  std::vector<Vec3> anchors_;
  std::vector<Vec3> normals_;
  std::vector<double> offsets_;
  std::vector<std::uint8_t> touched_;
};

LineNet make_plane_net(double z0, const GridBounds& bounds, std::size_t nx, std::size_t ny,
                       double stock);
LineNet make_hypar_net(double k, const GridBounds& bounds, std::size_t nx, std::size_t ny,
                       double stock);
LineNet make_net(const NominalSurface& surface, const GridBounds& bounds, std::size_t nx,
                 std::size_t ny, double stock);

}  // namespace surftopo
