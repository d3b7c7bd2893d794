#include "surftopo/surface.hpp"

#include "surftopo/errors.hpp"

#include <cmath>

namespace surftopo {

NominalSurface NominalSurface::hypar(double k) {
  if (k == 0.0 || !std::isfinite(k)) throw DomainError("hypar: warp constant k must be non-zero");
  return {Kind::kHyperbolicParaboloid, 0.0, k};
}

double NominalSurface::height(double x, double y) const {
  return kind == Kind::kPlane ? z0 : x * y / k;
}

Vec3 surface_normal(const NominalSurface& surface, double x, double y) {
  if (surface.kind == NominalSurface::Kind::kPlane) return Vec3::UnitZ();
  return Vec3(-y / surface.k, -x / surface.k, 1.0).normalized();
}

void LineNet::init_grid(const GridBounds& bounds, std::size_t nx, std::size_t ny, double stock) {
  if (nx < 2 || ny < 2) throw DomainError("line net: nx and ny must be >= 2");
  if (!(bounds.xmax > bounds.xmin) || !(bounds.ymax > bounds.ymin)) {
    throw DomainError("line net: degenerate bounds");
  }
  if (!(stock > 0.0)) throw DomainError("line net: stock allowance must be positive");
  nx_ = nx;
  ny_ = ny;
  bounds_ = bounds;
  gx_ = (bounds.xmax - bounds.xmin) / static_cast<double>(nx - 1);
  gy_ = (bounds.ymax - bounds.ymin) / static_cast<double>(ny - 1);
  stock_ = stock;
  anchors_.resize(nx * ny);
  normals_.resize(nx * ny);
  offsets_.assign(nx * ny, stock);
  touched_.assign(nx * ny, 0);
}

LineNet make_plane_net(double z0, const GridBounds& bounds, std::size_t nx, std::size_t ny,
                       double stock) {
  LineNet net;
  net.init_grid(bounds, nx, ny, stock);
  net.surface_ = NominalSurface::plane(z0);
  net.planar_ = true;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t idx = net.index(i, j);
      net.anchors_[idx] = Vec3(net.x(i), net.y(j), z0);
      net.normals_[idx] = Vec3::UnitZ();
    }
  }
  return net;
}

LineNet make_hypar_net(double k, const GridBounds& bounds, std::size_t nx, std::size_t ny,
                       double stock) {
  LineNet net;
  net.surface_ = NominalSurface::hypar(k);
  net.init_grid(bounds, nx, ny, stock);
  net.planar_ = false;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t idx = net.index(i, j);
      const double x = net.x(i);
      const double y = net.y(j);
      net.anchors_[idx] = Vec3(x, y, x * y / k);
      net.normals_[idx] = surface_normal(net.surface_, x, y);
    }
  }
  return net;
}

LineNet make_net(const NominalSurface& surface, const GridBounds& bounds, std::size_t nx,
                 std::size_t ny, double stock) {
  if (surface.kind == NominalSurface::Kind::kPlane) {
    return make_plane_net(surface.z0, bounds, nx, ny, stock);
  }
  return make_hypar_net(surface.k, bounds, nx, ny, stock);
}

}  // namespace surftopo
