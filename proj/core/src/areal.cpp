#include "surftopo/areal.hpp"

#include "surftopo/errors.hpp"
#include "surftopo/geometry.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <ostream>
#include <sstream>

namespace surftopo {

std::string ParamValue::str(int precision) const {
  if (!defined) return "undef(" + reason + ")";
  std::ostringstream os;
  os.precision(precision);
  os << value;
  return os.str();
}

namespace {

// FFTW planning is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {
    if (!ptr) throw ResourceError("fftw: allocation failed");
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

// In-place 2D complex transform of an ny x nx row-major array.
void fft2(fftw_complex* data, std::size_t nx, std::size_t ny, int sign) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), data, data, sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

bool all_valid(const HeightField& hf) {
  return std::all_of(hf.valid.begin(), hf.valid.end(), [](std::uint8_t v) { return v != 0; });
}

// Full, mean-removed crop used by the spectral parameters.
HeightField spectral_input(const HeightField& hf) {
  HeightField f = all_valid(hf) ? hf : largest_valid_rectangle(hf);
  double mean = 0.0;
  for (double z : f.heights) mean += z;
  mean /= static_cast<double>(f.size());
  for (double& z : f.heights) z -= mean;
  return f;
}

bool is_flat(const HeightField& f) {
  double m = 0.0;
  for (double z : f.heights) m = std::max(m, std::abs(z));
  return m < 1e-12;
}

double bilinear(const Autocorrelation& acf, double fx, double fy) {
  const double lx = std::floor(fx);
  const double ly = std::floor(fy);
  const double tx = fx - lx;
  const double ty = fy - ly;
  const auto ix = static_cast<std::ptrdiff_t>(lx);
  const auto iy = static_cast<std::ptrdiff_t>(ly);
  const double v00 = acf.at(ix, iy);
  const double v10 = acf.at(ix + 1, iy);
  const double v01 = acf.at(ix, iy + 1);
  const double v11 = acf.at(ix + 1, iy + 1);
  return (1 - ty) * ((1 - tx) * v00 + tx * v10) + ty * ((1 - tx) * v01 + tx * v11);
}

}  // namespace

HeightField level(const HeightField& hf) {
  std::size_t n = 0;
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < hf.ny; ++j) {
    for (std::size_t i = 0; i < hf.nx; ++i) {
      if (!hf.is_valid(i, j)) continue;
      mx += static_cast<double>(i);
      my += static_cast<double>(j);
      ++n;
    }
  }
  if (n < 3) throw DomainError("level: at least 3 valid cells are required");
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (std::size_t j = 0; j < hf.ny; ++j) {
    for (std::size_t i = 0; i < hf.nx; ++i) {
      if (!hf.is_valid(i, j)) continue;
      const Eigen::Vector3d row(1.0, static_cast<double>(i) - mx, static_cast<double>(j) - my);
      A += row * row.transpose();
      b += row * hf.at(i, j);
    }
  }
  const Eigen::ColPivHouseholderQR<Eigen::Matrix3d> qr(A);
  if (qr.rank() < 3) throw DomainError("level: valid cells are collinear, plane fit is rank deficient");
  const Eigen::Vector3d coef = qr.solve(b);
  HeightField out = hf;
  for (std::size_t j = 0; j < hf.ny; ++j) {
    for (std::size_t i = 0; i < hf.nx; ++i) {
      if (!hf.is_valid(i, j)) continue;
      out.at(i, j) = hf.at(i, j) - (coef[0] + coef[1] * (static_cast<double>(i) - mx) +
                                    coef[2] * (static_cast<double>(j) - my));
    }
  }
  return out;
}

AmplitudeParams amplitude_params(const HeightField& hf) {
  double n = 0.0, s1 = 0.0, sabs = 0.0, s2 = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < hf.size(); ++k) {
    if (!hf.valid[k]) continue;
    const double z = hf.heights[k];
    n += 1.0;
    s1 += z;
    sabs += std::abs(z);
    s2 += z * z;
    lo = std::min(lo, z);
    hi = std::max(hi, z);
  }
  if (n == 0.0) throw DomainError("amplitude_params: no valid cells");
  AmplitudeParams p;
  p.Sa = sabs / n;
  p.Sq = std::sqrt(s2 / n);
  p.Sz = hi - lo;
  p.Sv = std::abs(std::min(lo, 0.0));
  const double mean = s1 / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < hf.size(); ++k) {
    if (!hf.valid[k]) continue;
    const double d = hf.heights[k] - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (p.Sq < 1e-12 || m2 <= 0.0) {
    p.Ssk = ParamValue::undefined("zero_sq");
    p.Sku = ParamValue::undefined("zero_sq");
  } else {
    p.Ssk = ParamValue::of(m3 / std::pow(m2, 1.5));
    p.Sku = ParamValue::of(m4 / (m2 * m2));
  }
  return p;
}

double summit_density(const HeightField& hf) {
  if (hf.nx < 3 || hf.ny < 3) throw DomainError("summit_density: field must be at least 3x3");
  std::size_t count = 0;
  for (std::size_t j = 1; j + 1 < hf.ny; ++j) {
    for (std::size_t i = 1; i + 1 < hf.nx; ++i) {
      if (!hf.is_valid(i, j)) continue;
      const double z = hf.at(i, j);
      bool summit = true;
      for (int dj = -1; dj <= 1 && summit; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const std::size_t ii = i + di;
          const std::size_t jj = j + dj;
          if (!hf.is_valid(ii, jj) || !(z > hf.at(ii, jj))) {
            summit = false;
            break;
          }
        }
      }
      if (summit) ++count;
    }
  }
  const double area = static_cast<double>(hf.valid_count()) * hf.dx * hf.dy;
  return area > 0.0 ? static_cast<double>(count) / area : 0.0;
}

Autocorrelation autocorrelation_fft(const HeightField& hf) {
  const HeightField f = spectral_input(hf);
  const std::size_t px = 2 * f.nx;
  const std::size_t py = 2 * f.ny;
  FftwBuffer buf(px * py);
  std::fill_n(&buf.ptr[0][0], 2 * px * py, 0.0);
  for (std::size_t j = 0; j < f.ny; ++j) {
    for (std::size_t i = 0; i < f.nx; ++i) buf.ptr[j * px + i][0] = f.at(i, j);
  }
  fft2(buf.ptr, px, py, FFTW_FORWARD);
  for (std::size_t k = 0; k < px * py; ++k) {
    const double re = buf.ptr[k][0];
    const double im = buf.ptr[k][1];
    buf.ptr[k][0] = re * re + im * im;
    buf.ptr[k][1] = 0.0;
  }
  fft2(buf.ptr, px, py, FFTW_BACKWARD);
  Autocorrelation acf;
  acf.nx = f.nx;
  acf.ny = f.ny;
  acf.dx = f.dx;
  acf.dy = f.dy;
  const std::size_t w = 2 * f.nx - 1;
  acf.values.assign(w * (2 * f.ny - 1), 0.0);
  const double zero = buf.ptr[0][0];
  const auto nx = static_cast<std::ptrdiff_t>(f.nx);
  const auto ny = static_cast<std::ptrdiff_t>(f.ny);
  for (std::ptrdiff_t ly = -(ny - 1); ly <= ny - 1; ++ly) {
    for (std::ptrdiff_t lx = -(nx - 1); lx <= nx - 1; ++lx) {
      const std::size_t sx = static_cast<std::size_t>((lx + static_cast<std::ptrdiff_t>(px)) %
                                                      static_cast<std::ptrdiff_t>(px));
      const std::size_t sy = static_cast<std::size_t>((ly + static_cast<std::ptrdiff_t>(py)) %
                                                      static_cast<std::ptrdiff_t>(py));
      const double v = zero > 0.0 ? buf.ptr[sy * px + sx][0] / zero : 0.0;
      acf.values[static_cast<std::size_t>(ly + ny - 1) * w + static_cast<std::size_t>(lx + nx - 1)] = v;
    }
  }
  return acf;
}

Autocorrelation autocorrelation_direct(const HeightField& hf) {
  const HeightField f = spectral_input(hf);
  Autocorrelation acf;
  acf.nx = f.nx;
  acf.ny = f.ny;
  acf.dx = f.dx;
  acf.dy = f.dy;
  const auto nx = static_cast<std::ptrdiff_t>(f.nx);
  const auto ny = static_cast<std::ptrdiff_t>(f.ny);
  const std::size_t w = 2 * f.nx - 1;
  acf.values.assign(w * (2 * f.ny - 1), 0.0);
  double zero = 0.0;
  for (double z : f.heights) zero += z * z;
  for (std::ptrdiff_t ly = -(ny - 1); ly <= ny - 1; ++ly) {
    for (std::ptrdiff_t lx = -(nx - 1); lx <= nx - 1; ++lx) {
      double s = 0.0;
      for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, -ly); j < std::min(ny, ny - ly); ++j) {
        for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, -lx); i < std::min(nx, nx - lx); ++i) {
          s += f.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
               f.at(static_cast<std::size_t>(i + lx), static_cast<std::size_t>(j + ly));
        }
      }
      acf.values[static_cast<std::size_t>(ly + ny - 1) * w + static_cast<std::size_t>(lx + nx - 1)] =
          zero > 0.0 ? s / zero : 0.0;
    }
  }
  return acf;
}

ParamValue autocorrelation_length(const HeightField& hf, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw DomainError("autocorrelation_length: threshold must lie in (0, 1)");
  }
  const HeightField f = spectral_input(hf);
  if (f.nx < 2 || f.ny < 2 || is_flat(f)) return ParamValue::undefined("constant_field");
  const Autocorrelation acf = autocorrelation_fft(f);
  const double max_lag = 0.5 * std::min(static_cast<double>(f.nx - 1) * f.dx,
                                        static_cast<double>(f.ny - 1) * f.dy);
  const double step = 0.5 * std::min(f.dx, f.dy);
  const auto steps = static_cast<std::size_t>(std::floor(max_lag / step));
  double best = std::numeric_limits<double>::infinity();
  for (int deg = 0; deg < 180; ++deg) {
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    double prev = 1.0;
    for (std::size_t k = 1; k <= steps; ++k) {
      const double r = static_cast<double>(k) * step;
      const double v = bilinear(acf, r * c / f.dx, r * s / f.dy);
      if (v <= threshold) {
        const double r0 = r - step;
        const double cross = r0 + step * (prev - threshold) / (prev - v);
        best = std::min(best, cross);
        break;
      }
      prev = v;
      if (r >= best) break;
    }
  }
  if (!std::isfinite(best)) return ParamValue::undefined("no_decay", max_lag);
  return ParamValue::of(best);
}

ParamValue texture_direction(const HeightField& hf) {
  const HeightField f = spectral_input(hf);
  if (f.nx < 4 || f.ny < 4 || is_flat(f)) return ParamValue::undefined("constant_field");
  const std::size_t nx = f.nx;
  const std::size_t ny = f.ny;
  // Hann window, weighted mean removed, zero padded 2x per axis.
  std::vector<double> wx(nx), wy(ny);
  for (std::size_t i = 0; i < nx; ++i) wx[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(nx - 1));
  for (std::size_t j = 0; j < ny; ++j) wy[j] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(j) / static_cast<double>(ny - 1));
  double sw = 0.0, shw = 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      sw += wx[i] * wy[j];
      shw += wx[i] * wy[j] * f.at(i, j);
    }
  }
  const double wmean = shw / sw;
  const std::size_t px = 2 * nx;
  const std::size_t py = 2 * ny;
  FftwBuffer buf(px * py);
  std::fill_n(&buf.ptr[0][0], 2 * px * py, 0.0);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) buf.ptr[j * px + i][0] = (f.at(i, j) - wmean) * wx[i] * wy[j];
  }
  fft2(buf.ptr, px, py, FFTW_FORWARD);

  // Power and doubled-angle orientation of every non-DC frequency; the
  // half-plane ky > 0 (plus ky = 0, kx > 0) covers each direction once.
  struct Sample {
    double angle;  // degrees in [0, 180)
    double power;
  };
  std::vector<Sample> samples;
  samples.reserve(px * py / 2);
  constexpr int kBins = 180;
  std::vector<double> bins(kBins, 0.0);
  double total = 0.0, rx = 0.0, ry = 0.0;
  for (std::size_t j = 0; j <= py / 2; ++j) {
    const double fy = static_cast<double>(j) / (static_cast<double>(py) * f.dy);
    for (std::size_t i = 0; i < px; ++i) {
      const auto kx = i <= px / 2 ? static_cast<std::ptrdiff_t>(i)
                                  : static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(px);
      if (j == 0 && kx <= 0) continue;
      const double fx = static_cast<double>(kx) / (static_cast<double>(px) * f.dx);
      const double re = buf.ptr[j * px + i][0];
      const double im = buf.ptr[j * px + i][1];
      const double power = re * re + im * im;
      double ang = rad2deg(std::atan2(fy, fx));
      if (ang >= 180.0) ang -= 180.0;
      samples.push_back({ang, power});
      const int b = static_cast<int>(std::lround(ang / kStdBinDegrees)) % kBins;
      bins[static_cast<std::size_t>(b)] += power;
      total += power;
      rx += power * std::cos(deg2rad(2.0 * ang));
      ry += power * std::sin(deg2rad(2.0 * ang));
    }
  }
  // On a square lattice the doubled-angle resultant of a radially symmetric
  // spectrum cancels, so its length measures anisotropy.
  if (!(total > 0.0) || std::hypot(rx, ry) / total < kStdIsotropyThreshold) {
    return ParamValue::undefined("isotropic");
  }
  std::size_t peak = 0;
  for (std::size_t b = 1; b < bins.size(); ++b) {
    if (bins[b] > bins[peak]) peak = b;
  }
  // Sub-bin refinement: power-weighted doubled-angle mean of the
  // frequencies within a few degrees of the peak bin.
  const double centre = static_cast<double>(peak) * kStdBinDegrees;
  double sx = 0.0, sy = 0.0;
  for (const Sample& s : samples) {
    double d = s.angle - centre;
    if (d > 90.0) d -= 180.0;
    if (d <= -90.0) d += 180.0;
    if (std::abs(d) > kStdRefineDegrees) continue;
    sx += s.power * std::cos(deg2rad(2.0 * s.angle));
    sy += s.power * std::sin(deg2rad(2.0 * s.angle));
  }
  const double dominant = 0.5 * rad2deg(std::atan2(sy, sx));
  double lay = dominant + 90.0;
  while (lay > 90.0) lay -= 180.0;
  while (lay <= -90.0) lay += 180.0;
  return ParamValue::of(lay);
}

HeightField largest_valid_rectangle(const HeightField& hf) {
  std::vector<std::size_t> height(hf.nx, 0);
  std::size_t best_area = 0, bi0 = 0, bj0 = 0, bw = 0, bh = 0;
  std::vector<std::size_t> stack;
  for (std::size_t j = 0; j < hf.ny; ++j) {
    for (std::size_t i = 0; i < hf.nx; ++i) height[i] = hf.is_valid(i, j) ? height[i] + 1 : 0;
    stack.clear();
    for (std::size_t i = 0; i <= hf.nx; ++i) {
      const std::size_t h = i < hf.nx ? height[i] : 0;
      while (!stack.empty() && height[stack.back()] >= h) {
        const std::size_t top = stack.back();
        stack.pop_back();
        const std::size_t left = stack.empty() ? 0 : stack.back() + 1;
        const std::size_t width = i - left;
        const std::size_t area = width * height[top];
        if (area > best_area) {
          best_area = area;
          bi0 = left;
          bw = width;
          bh = height[top];
          bj0 = j + 1 - bh;
        }
      }
      stack.push_back(i);
    }
  }
  if (best_area == 0) throw DomainError("largest_valid_rectangle: field has no valid cells");
  HeightField out(bw, bh, hf.dx, hf.dy);
  out.x0 = hf.x0 + static_cast<double>(bi0) * hf.dx;
  out.y0 = hf.y0 + static_cast<double>(bj0) * hf.dy;
  for (std::size_t j = 0; j < bh; ++j) {
    for (std::size_t i = 0; i < bw; ++i) out.at(i, j) = hf.at(bi0 + i, bj0 + j);
  }
  return out;
}

ArealParams compute_all(const HeightField& hf, double sal_threshold, bool already_levelled) {
  ArealParams p;
  HeightField f;
  try {
    f = already_levelled ? hf : level(hf);
  } catch (const DomainError&) {
    for (ParamValue* v : {&p.Sz, &p.Sa, &p.Sq, &p.Sku, &p.Ssk, &p.Sv, &p.Sds, &p.Sal, &p.Std}) {
      *v = ParamValue::undefined("levelling_failed");
    }
    return p;
  }
  const AmplitudeParams a = amplitude_params(f);
  p.Sz = ParamValue::of(a.Sz);
  p.Sa = ParamValue::of(a.Sa);
  p.Sq = ParamValue::of(a.Sq);
  p.Sku = a.Sku;
  p.Ssk = a.Ssk;
  p.Sv = ParamValue::of(a.Sv);
  try {
    p.Sds = ParamValue::of(summit_density(f));
  } catch (const DomainError&) {
    p.Sds = ParamValue::undefined("field_too_small");
  }
  try {
    p.Sal = autocorrelation_length(f, sal_threshold);
  } catch (const DomainError&) {
    p.Sal = ParamValue::undefined("no_valid_crop");
  }
  try {
    p.Std = texture_direction(f);
  } catch (const DomainError&) {
    p.Std = ParamValue::undefined("no_valid_crop");
  }
  return p;
}

const std::vector<std::string>& areal_param_names() {
  static const std::vector<std::string> names{"Sz_um", "Sa_um", "Sq_um",         "Sku",
                                              "Ssk",   "Sv_um", "Sds_per_mm2", "Sal_mm",
                                              "Std_deg"};
  return names;
}

std::vector<ParamValue> areal_param_values(const ArealParams& p) {
  return {p.Sz, p.Sa, p.Sq, p.Sku, p.Ssk, p.Sv, p.Sds, p.Sal, p.Std};
}

void write_areal_report(const ArealParams& p, std::ostream& out) {
  const auto& names = areal_param_names();
  const auto values = areal_param_values(p);
  for (std::size_t k = 0; k < names.size(); ++k) {
    out << names[k] << " = " << values[k].str(8) << '\n';
  }
}

void write_areal_csv(const std::vector<ArealParams>& rows, std::ostream& out) {
  const auto& names = areal_param_names();
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
  for (const auto& row : rows) {
    const auto values = areal_param_values(row);
    for (std::size_t k = 0; k < values.size(); ++k) out << (k ? "," : "") << values[k].str(10);
    out << '\n';
  }
}

}  // namespace surftopo
