#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace surftopo {

// Topography on a regular XY grid. Heights in micrometres; spacing and
// origin in millimetres. Cell (i, j) is stored at j * nx + i. Masked cells
// carry NaN and valid = 0.
struct HeightField {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 1.0;
  double dy = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;
  std::vector<double> heights;
  std::vector<std::uint8_t> valid;

  HeightField() = default;
  HeightField(std::size_t nx_, std::size_t ny_, double dx_, double dy_)
      : nx(nx_), ny(ny_), dx(dx_), dy(dy_), heights(nx_ * ny_, 0.0), valid(nx_ * ny_, 1) {}

  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  double& at(std::size_t i, std::size_t j) { return heights[index(i, j)]; }
  double at(std::size_t i, std::size_t j) const { return heights[index(i, j)]; }
  bool is_valid(std::size_t i, std::size_t j) const { return valid[index(i, j)] != 0; }
  std::size_t valid_count() const;
  void mask(std::size_t i, std::size_t j);
};

// CSV: `#` metadata header (nx, ny, dx_mm, dy_mm, x0_mm, y0_mm) followed by
// ny rows of nx comma-separated values, masked cells written as `nan`.
// Values use the shortest round-trip representation, so write/read is exact.
void write_heightfield_csv(const HeightField& hf, std::ostream& out);
void write_heightfield_csv(const HeightField& hf, const std::filesystem::path& path);
HeightField read_heightfield_csv(std::istream& in, const std::string& source = "<stream>");
HeightField read_heightfield_csv(const std::filesystem::path& path);

struct RenderRange {
  double lo = 0.0;
  double hi = 0.0;
};

// 16-bit binary PGM, min-max normalised over valid cells unless a fixed
// range is given (values outside are clipped). The first image row is the
// largest y. Masked cells are written as 0. A header comment records the
// offset and scale so levels map back to micrometres.
void write_pgm16(const HeightField& hf, std::ostream& out,
                 std::optional<RenderRange> range = std::nullopt);

// 8-bit binary PPM with a blue-white-red ramp; same normalisation rules.
void write_ppm(const HeightField& hf, std::ostream& out,
               std::optional<RenderRange> range = std::nullopt);

void write_image(const HeightField& hf, const std::filesystem::path& path,
                 std::optional<RenderRange> range = std::nullopt);

}  // namespace surftopo
