#include "surftopo/heightfield.hpp"

#include "surftopo/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace surftopo {

std::size_t HeightField::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

void HeightField::mask(std::size_t i, std::size_t j) {
  valid[index(i, j)] = 0;
  heights[index(i, j)] = std::numeric_limits<double>::quiet_NaN();
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

bool parse_number(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r' || text.back() == '\t')) {
    text.remove_suffix(1);
  }
  if (text == "nan" || text == "NaN") {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

}  // namespace

void write_heightfield_csv(const HeightField& hf, std::ostream& out) {
  out << "# surftopo heightfield v1, units=um\n";
  out << "# nx=" << hf.nx << " ny=" << hf.ny << " dx_mm=" << format_double(hf.dx)
      << " dy_mm=" << format_double(hf.dy) << " x0_mm=" << format_double(hf.x0)
      << " y0_mm=" << format_double(hf.y0) << '\n';
  std::string row;
  for (std::size_t j = 0; j < hf.ny; ++j) {
    row.clear();
    for (std::size_t i = 0; i < hf.nx; ++i) {
      if (i) row += ',';
      const std::size_t idx = hf.index(i, j);
      row += hf.valid[idx] ? format_double(hf.heights[idx]) : "nan";
    }
    row += '\n';
    out << row;
  }
}

void write_heightfield_csv(const HeightField& hf, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write heightfield '" + path.string() + "'");
  write_heightfield_csv(hf, out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

HeightField read_heightfield_csv(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> meta;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tok;
      while (ls >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) meta[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
      continue;
    }
    std::vector<double> values;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      double v;
      if (!parse_number(rest.substr(0, comma), v)) {
        throw ParseError(source + ":" + std::to_string(line_no) + ": non-numeric height value");
      }
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(source + ": no height rows");

  auto meta_number = [&](const char* key, double fallback) {
    const auto it = meta.find(key);
    if (it == meta.end()) return fallback;
    double v;
    if (!parse_number(it->second, v)) throw ParseError(source + ": bad metadata " + key);
    return v;
  };
  HeightField hf(rows.front().size(), rows.size(), meta_number("dx_mm", 1.0),
                 meta_number("dy_mm", 1.0));
  hf.x0 = meta_number("x0_mm", 0.0);
  hf.y0 = meta_number("y0_mm", 0.0);
  if (meta.count("nx") && static_cast<std::size_t>(meta_number("nx", 0)) != hf.nx) {
    throw ParseError(source + ": column count does not match nx");
  }
  if (meta.count("ny") && static_cast<std::size_t>(meta_number("ny", 0)) != hf.ny) {
    throw ParseError(source + ": row count does not match ny");
  }
  if (!(hf.dx > 0.0) || !(hf.dy > 0.0)) throw ParseError(source + ": spacing must be positive");
  for (std::size_t j = 0; j < hf.ny; ++j) {
    for (std::size_t i = 0; i < hf.nx; ++i) {
      const double v = rows[j][i];
      if (std::isnan(v)) {
        hf.mask(i, j);
      } else {
        hf.at(i, j) = v;
      }
    }
  }
  return hf;
}

HeightField read_heightfield_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open heightfield '" + path.string() + "'");
  return read_heightfield_csv(in, path.string());
}

namespace {

struct Normalisation {
  double offset = 0.0;
  double span = 0.0;
  bool fixed = false;
  std::size_t clipped = 0;
};

Normalisation normalisation(const HeightField& hf, std::optional<RenderRange> range) {
  Normalisation n;
  if (range) {
    n.offset = range->lo;
    n.span = range->hi - range->lo;
    n.fixed = true;
    if (!(n.span > 0.0)) throw DomainError("render range must satisfy lo < hi");
    for (std::size_t k = 0; k < hf.size(); ++k) {
      if (hf.valid[k] && (hf.heights[k] < range->lo || hf.heights[k] > range->hi)) ++n.clipped;
    }
    return n;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < hf.size(); ++k) {
    if (!hf.valid[k]) continue;
    lo = std::min(lo, hf.heights[k]);
    hi = std::max(hi, hf.heights[k]);
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 0.0;
  }
  n.offset = lo;
  n.span = hi - lo;
  return n;
}

// Fraction in [0, 1] of a height under the normalisation.
double unit_level(const Normalisation& n, double h) {
  if (!(n.span > 0.0)) return 0.0;
  return std::clamp((h - n.offset) / n.span, 0.0, 1.0);
}

void write_header_comment(std::ostream& out, const Normalisation& n, unsigned max_level) {
  const double scale = n.span > 0.0 ? n.span / max_level : 0.0;
  out << "# surftopo offset_um=" << format_double(n.offset)
      << " scale_um_per_level=" << format_double(scale);
  if (n.fixed) {
    out << " range_um=" << format_double(n.offset) << ':' << format_double(n.offset + n.span)
        << " clipped=" << n.clipped;
  }
  out << '\n';
}

}  // namespace

void write_pgm16(const HeightField& hf, std::ostream& out, std::optional<RenderRange> range) {
  const Normalisation n = normalisation(hf, range);
  out << "P5\n";
  write_header_comment(out, n, 65535);
  out << hf.nx << ' ' << hf.ny << "\n65535\n";
  for (std::size_t jj = 0; jj < hf.ny; ++jj) {
    const std::size_t j = hf.ny - 1 - jj;
    for (std::size_t i = 0; i < hf.nx; ++i) {
      const std::size_t idx = hf.index(i, j);
      unsigned level = 0;
      if (hf.valid[idx]) {
        level = static_cast<unsigned>(std::lround(unit_level(n, hf.heights[idx]) * 65535.0));
      }
      out.put(static_cast<char>((level >> 8) & 0xFF));
      out.put(static_cast<char>(level & 0xFF));
    }
  }
}

void write_ppm(const HeightField& hf, std::ostream& out, std::optional<RenderRange> range) {
  const Normalisation n = normalisation(hf, range);
  out << "P6\n";
  write_header_comment(out, n, 255);
  out << hf.nx << ' ' << hf.ny << "\n255\n";
  for (std::size_t jj = 0; jj < hf.ny; ++jj) {
    const std::size_t j = hf.ny - 1 - jj;
    for (std::size_t i = 0; i < hf.nx; ++i) {
      const std::size_t idx = hf.index(i, j);
      std::array<unsigned char, 3> rgb{0, 0, 0};
      if (hf.valid[idx]) {
        const double u = unit_level(n, hf.heights[idx]);
        // blue (low) -> white -> red (high)
        const double lo_part = std::min(1.0, 2.0 * u);
        const double hi_part = std::max(0.0, 2.0 * u - 1.0);
        rgb[0] = static_cast<unsigned char>(std::lround(255.0 * lo_part));
        rgb[1] = static_cast<unsigned char>(std::lround(255.0 * (lo_part - hi_part)));
        rgb[2] = static_cast<unsigned char>(std::lround(255.0 * (1.0 - hi_part)));
      }
      out.write(reinterpret_cast<const char*>(rgb.data()), 3);
    }
  }
}

void write_image(const HeightField& hf, const std::filesystem::path& path,
                 std::optional<RenderRange> range) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image '" + path.string() + "'");
  if (path.extension() == ".ppm") {
    write_ppm(hf, out, range);
  } else {
    write_pgm16(hf, out, range);
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace surftopo
