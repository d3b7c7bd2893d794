#include "surftopo/nbuffer.hpp"

#include "surftopo/errors.hpp"
#include "surftopo/tool_mesh.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace surftopo {

double SimulationStats::culled_fraction() const {
  const double pairs = static_cast<double>(states) * static_cast<double>(total_cells);
  if (pairs <= 0.0) return 0.0;
  return 1.0 - static_cast<double>(candidate_cells) / pairs;
}

std::string SimulationStats::to_json() const {
  nlohmann::ordered_json j;
  j["states"] = states;
  j["cells"] = total_cells;
  j["candidate_cells"] = candidate_cells;
  j["hits"] = hits;
  j["updates"] = updates;
  j["culled_fraction"] = culled_fraction();
  j["degenerate_triangles"] = degenerate_triangles;
  return j.dump(2);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower bound on the height (relative to the tip) at which a vertical line
// can first meet the cutter, tabulated on a coarse grid centred on the tip.
// The lower boundary of a convex solid is a convex function of (x, y), so
// the tangent plane at a cell centre bounds the whole cell from below.
struct BoundMap {
  Vec3 axis;
  double half = 0.0;
  double cell = 0.0;
  std::size_t n = 0;
  std::vector<double> lb;

  double lookup(double dx, double dy) const {
    const double fx = (dx + half) / cell;
    const double fy = (dy + half) / cell;
    if (fx < 0.0 || fy < 0.0) return kInf;
    const auto ix = static_cast<std::size_t>(fx);
    const auto iy = static_cast<std::size_t>(fy);
    if (ix >= n || iy >= n) return kInf;
    return lb[iy * n + ix];
  }
};

std::shared_ptr<const BoundMap> build_bound_map(const FilletedCutter& cutter, const Vec3& axis) {
  auto map = std::make_shared<BoundMap>();
  map->axis = axis;
  const AxisFrame frame = AxisFrame::from_axis(axis);
  const double s = std::hypot(axis.x(), axis.y());
  const double R = cutter.radius();
  const double H = cutter.flute_height();
  map->half = R + H * s + 1e-6;
  map->cell = R / 128.0;
  map->n = static_cast<std::size_t>(std::ceil(2.0 * map->half / map->cell));
  map->lb.assign(map->n * map->n, -kInf);
  const double half_diag = map->cell * std::sqrt(0.5);
  const double z_start = -(R + H) - 1.0;
  const Vec3 d_local = frame.to_local(Vec3::UnitZ());
  for (std::size_t iy = 0; iy < map->n; ++iy) {
    for (std::size_t ix = 0; ix < map->n; ++ix) {
      const double qx = -map->half + (static_cast<double>(ix) + 0.5) * map->cell;
      const double qy = -map->half + (static_cast<double>(iy) + 0.5) * map->cell;
      const auto hit = cutter.intersect_local(frame.to_local(Vec3(qx, qy, z_start)), d_local);
      if (!hit) continue;
      const Vec3 nw = frame.to_world(hit->normal);
      if (nw.z() > -1e-3) continue;  // too steep for a useful bound
      const double grad = std::hypot(nw.x(), nw.y()) / -nw.z();
      map->lb[iy * map->n + ix] = z_start + hit->t - grad * half_diag - 1e-9;
    }
  }
  return map;
}

struct PreparedState {
  Vec3 tip;
  AxisFrame frame;
  double spindle = 0.0;
  double window = 0.0;
  bool gated = false;        // tooth gating applies (window shorter than a tooth period)
  double zmin_tool = 0.0;    // lowest world z of the cutter
  double axis_xy = 0.0;      // |axis_xy|
  const BoundMap* bound = nullptr;
  // Per tooth: normals of the two half-planes bounding the swept sector.
  std::vector<std::pair<Vec3, Vec3>> sector;
};

struct Counters {
  std::size_t candidates = 0;
  std::size_t hits = 0;
  std::size_t updates = 0;
};

struct Interval {
  double lo;
  double hi;
};

}  // namespace

struct NBufferEngine::Impl {
  LineNet& net;
  ToolDefinition tool;
  FilletedCutter cutter;
  const ToolMesh* mesh = nullptr;
  SimulationMode mode;
  EngineOptions options;
  double cull_radius;
  double tooth_period;
  double origin_depth;
  double max_normal_xy = 0.0;
  std::vector<double> row_max;          // upper bound of offsets per row
  std::vector<std::uint8_t> row_dirty;  // row changed since last refresh
  std::vector<std::shared_ptr<const BoundMap>> map_cache;

  Impl(LineNet& n, const ToolDefinition& t, SimulationMode m, EngineOptions o)
      : net(n), tool(t), cutter(t), mode(m), options(o) {
    tool.validate();
    if (tool.mesh) mesh = tool.mesh.get();
    cull_radius = std::max(mode.cull_radius, tool.R);
    tooth_period = kTwoPi / tool.tooth_count;
    origin_depth = 2.0 * (tool.R + tool.flute_height);
    row_max.assign(net.ny(), -kInf);
    row_dirty.assign(net.ny(), 1);
    for (std::size_t k = 0; k < net.size(); ++k) {
      const Vec3& nn = net.normal(k);
      max_normal_xy = std::max(max_normal_xy, std::hypot(nn.x(), nn.y()));
    }
    refresh_rows(0, net.ny());
  }

  void refresh_rows(std::size_t j0, std::size_t j1) {
    const auto& off = net.offsets();
    for (std::size_t j = j0; j < j1; ++j) {
      if (!row_dirty[j]) continue;
      double m = -kInf;
      const std::size_t base = j * net.nx();
      for (std::size_t i = 0; i < net.nx(); ++i) m = std::max(m, off[base + i]);
      row_max[j] = m;
      row_dirty[j] = 0;
    }
  }

  PreparedState prepare(const SampledToolState& s) const {
    PreparedState ps;
    ps.tip = s.state.tip;
    ps.frame = AxisFrame::from_axis(s.state.axis);
    ps.spindle = s.state.spindle_angle;
    ps.window = s.window_length() * (1.0 + std::max(0.0, mode.window_overlap));
    ps.gated = mode.kind == SimulationMode::Kind::kToothGated && ps.window < tooth_period;
    const Vec3& a = ps.frame.axis;
    ps.axis_xy = std::hypot(a.x(), a.y());
    const double Rm = tool.R - tool.r;
    // Lowest point: either the rounded bottom (disk of radius Rm swept by a
    // ball of radius r) or the rim of the barrel cap.
    const double bottom = tool.r * a.z() - Rm * ps.axis_xy - tool.r;
    const double cap = tool.flute_height * a.z() - tool.R * ps.axis_xy;
    ps.zmin_tool = ps.tip.z() + std::min(bottom, cap);
    if (ps.gated && options.sector_raster && ps.window < kPi) {
      ps.sector.reserve(static_cast<std::size_t>(tool.tooth_count));
      for (int k = 0; k < tool.tooth_count; ++k) {
        const double beta = ps.spindle + k * tooth_period;
        const Vec3 ds = std::cos(beta) * ps.frame.e1 + std::sin(beta) * ps.frame.e2;
        const Vec3 de = std::cos(beta + ps.window) * ps.frame.e1 + std::sin(beta + ps.window) * ps.frame.e2;
        ps.sector.emplace_back(a.cross(ds), de.cross(a));
      }
    }
    return ps;
  }

  // Exact update of one cell.
  void process_cell(std::size_t idx, const PreparedState& ps, double origin_offset,
                    Counters& cnt) {
    auto& off = net.offsets();
    const Vec3& n = net.normal(idx);
    const Vec3 origin = net.anchor(idx) + origin_offset * n;
    const Vec3 p = ps.frame.to_local(origin - ps.tip);
    const Vec3 d = ps.frame.to_local(n);
    ++cnt.candidates;
    const std::optional<LocalHit> hit = mesh ? mesh->intersect_local(p, d) : cutter.intersect_local(p, d);
    if (!hit) return;
    double c_hit = origin_offset + hit->t;
    Vec3 where = hit->point;
    if (hit->normal.dot(d) > 0.0) {
      // The line starts inside the cutter: everything above the origin is cut.
      c_hit = origin_offset;
      where = p;
    }
    if (ps.gated) {
      const double phi = hit_azimuth(where, ps.spindle);
      if (std::fmod(phi, tooth_period) >= ps.window) return;
    }
    ++cnt.hits;
    if (c_hit < off[idx]) {
      off[idx] = c_hit;
      net.touched()[idx] = 1;
      ++cnt.updates;
    }
  }

  // Y extent (relative to the tip) of the union over teeth of the disk of
  // radius r_xy cut by each tooth's two sector half-planes. Extremes of a
  // convex region of this kind sit at a vertex or at the top/bottom of the arc.
  std::pair<double, double> sector_y_range(const PreparedState& ps, double r_xy, double zlo,
                                           double zhi) const {
    if (ps.sector.empty()) return {-r_xy, r_xy};
    constexpr double kSlack = 1e-9;
    const double dz_lo = zlo - ps.tip.z();
    const double dz_hi = zhi - ps.tip.z();
    double ylo = kInf, yhi = -kInf;
    for (const auto& [m1, m2] : ps.sector) {
      const double b1 = std::max(dz_lo * m1.z(), dz_hi * m1.z()) + kSlack;
      const double b2 = std::max(dz_lo * m2.z(), dz_hi * m2.z()) + kSlack;
      const double r2 = r_xy * r_xy;
      auto feasible = [&](double x, double y) {
        return m1.x() * x + m1.y() * y + b1 >= -1e-9 && m2.x() * x + m2.y() * y + b2 >= -1e-9 &&
               x * x + y * y <= r2 * (1.0 + 1e-12) + 1e-12;
      };
      auto take = [&](double x, double y) {
        if (!feasible(x, y)) return;
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
      };
      take(0.0, r_xy);
      take(0.0, -r_xy);
      for (const auto& [m, b] : {std::pair<const Vec3&, double>(m1, b1), std::pair<const Vec3&, double>(m2, b2)}) {
        // Line m_x x + m_y y + b = 0 against the circle.
        const double mm = m.x() * m.x() + m.y() * m.y();
        if (mm < 1e-24) continue;
        const double fx = -b * m.x() / mm;
        const double fy = -b * m.y() / mm;
        const double rem = r2 - b * b / mm;
        if (rem < 0.0) continue;
        const double h = std::sqrt(rem / mm);
        take(fx - h * m.y(), fy + h * m.x());
        take(fx + h * m.y(), fy - h * m.x());
      }
      const double det = m1.x() * m2.y() - m1.y() * m2.x();
      if (std::abs(det) > 1e-15) {
        take((-b1 * m2.y() + b2 * m1.y()) / det, (-m1.x() * b2 + m2.x() * b1) / det);
      }
    }
    return {ylo, yhi};
  }

  // Sector of allowed azimuths as half-plane constraints on x for a row.
  void sector_intervals(const PreparedState& ps, double dy, double zlo, double zhi, Interval disk,
                        std::vector<Interval>& out) const {
    out.clear();
    if (ps.sector.empty()) {
      out.push_back(disk);
      return;
    }
    constexpr double kSlack = 1e-9;
    const double dz_lo = zlo - ps.tip.z();
    const double dz_hi = zhi - ps.tip.z();
    for (const auto& [m1, m2] : ps.sector) {
      Interval iv = disk;
      bool empty = false;
      for (const Vec3* m : {&m1, &m2}) {
        // (x - tip.x) m_x + dy m_y + (z - tip.z) m_z >= 0 for some z in [zlo, zhi]
        const double base = dy * m->y() + std::max(dz_lo * m->z(), dz_hi * m->z()) + kSlack;
        if (std::abs(m->x()) < 1e-12) {
          if (base < 0.0) empty = true;
          continue;
        }
        const double bound = ps.tip.x() - base / m->x();
        if (m->x() > 0.0) {
          iv.lo = std::max(iv.lo, bound);
        } else {
          iv.hi = std::min(iv.hi, bound);
        }
      }
      if (!empty && iv.lo <= iv.hi) out.push_back(iv);
    }
    std::sort(out.begin(), out.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < out.size(); ++r) {
      if (w > 0 && out[r].lo <= out[w - 1].hi) {
        out[w - 1].hi = std::max(out[w - 1].hi, out[r].hi);
      } else {
        out[w++] = out[r];
      }
    }
    out.resize(w);
  }

  void run_planar_band(std::span<const PreparedState> prepared, std::size_t j0, std::size_t j1,
                       Counters& cnt) {
    const double z0 = net.surface().z0;
    const double gx = net.spacing_x();
    const double gy = net.spacing_y();
    const double x0 = net.x0();
    const double y0 = net.y0();
    const std::size_t nx = net.nx();
    auto& off = net.offsets();
    std::vector<Interval> intervals;
    constexpr std::size_t kRefreshEvery = 256;
    for (std::size_t k = 0; k < prepared.size(); ++k) {
      if (k % kRefreshEvery == 0) refresh_rows(j0, j1);
      const PreparedState& ps = prepared[k];
      double band_cap = -kInf;
      for (std::size_t j = j0; j < j1; ++j) band_cap = std::max(band_cap, row_max[j]);
      band_cap += z0;
      if (ps.zmin_tool >= band_cap) continue;

      const double a_z = ps.frame.axis.z();
      double h_max = tool.flute_height;
      if (a_z > 1e-9) {
        h_max = std::clamp((band_cap - ps.tip.z() + tool.R * ps.axis_xy) / a_z, 0.0,
                           tool.flute_height);
      }
      const double r_xy = cull_radius + h_max * ps.axis_xy;
      const auto [sy_lo, sy_hi] = sector_y_range(ps, r_xy, ps.zmin_tool, band_cap);
      if (sy_lo > sy_hi) continue;
      const double jlo_f = std::ceil((ps.tip.y() + sy_lo - y0) / gy) - 1.0;
      const double jhi_f = std::floor((ps.tip.y() + sy_hi - y0) / gy) + 1.0;
      const auto jlo = static_cast<std::ptrdiff_t>(std::max(jlo_f, static_cast<double>(j0)));
      const auto jhi = static_cast<std::ptrdiff_t>(std::min(jhi_f, static_cast<double>(j1) - 1.0));
      const double origin_offset = -origin_depth;
      for (std::ptrdiff_t jj = jlo; jj <= jhi; ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        const double zcap = z0 + row_max[j];
        if (ps.zmin_tool >= zcap) continue;
        const double dy = y0 + static_cast<double>(j) * gy - ps.tip.y();
        const double rem = r_xy * r_xy - dy * dy;
        if (rem < 0.0) continue;
        const double half = std::sqrt(rem);
        sector_intervals(ps, dy, ps.zmin_tool, zcap, {ps.tip.x() - half, ps.tip.x() + half},
                         intervals);
        const std::size_t base = j * nx;
        bool changed = false;
        for (const Interval& iv : intervals) {
          const double ilo_f = std::max(0.0, std::ceil((iv.lo - x0) / gx) - 1.0);
          const double ihi_f = std::min(static_cast<double>(nx) - 1.0, std::floor((iv.hi - x0) / gx) + 1.0);
          if (ilo_f > ihi_f) continue;
          const auto ilo = static_cast<std::size_t>(ilo_f);
          const auto ihi = static_cast<std::size_t>(ihi_f);
          for (std::size_t i = ilo; i <= ihi; ++i) {
            const std::size_t idx = base + i;
            if (ps.bound) {
              const double lb = ps.bound->lookup(x0 + static_cast<double>(i) * gx - ps.tip.x(), dy);
              if (ps.tip.z() + lb >= z0 + off[idx]) continue;
            }
            const std::size_t before = cnt.updates;
            process_cell(idx, ps, origin_offset, cnt);
            changed |= cnt.updates != before;
          }
        }
        if (changed) row_dirty[j] = 1;
      }
    }
    refresh_rows(j0, j1);
  }

  void run_general_band(std::span<const PreparedState> prepared, std::size_t j0, std::size_t j1,
                        Counters& cnt) {
    const double gx = net.spacing_x();
    const double gy = net.spacing_y();
    const double x0 = net.x0();
    const double y0 = net.y0();
    const std::size_t nx = net.nx();
    const auto& off = net.offsets();
    const double H = tool.flute_height;
    const double sphere_r = std::sqrt(cull_radius * cull_radius + 0.25 * H * H);
    constexpr std::size_t kRefreshEvery = 256;
    for (std::size_t k = 0; k < prepared.size(); ++k) {
      if (k % kRefreshEvery == 0) refresh_rows(j0, j1);
      const PreparedState& ps = prepared[k];
      double band_cap = -kInf;
      for (std::size_t j = j0; j < j1; ++j) band_cap = std::max(band_cap, row_max[j]);
      const Vec3 centre = ps.tip + 0.5 * H * ps.frame.axis;
      // Anchors whose normal line can reach the tool's bounding sphere with
      // an offset in [-(2 sphere_r + R), band_cap].
      const double reach = std::max(band_cap, 0.0) + 2.0 * sphere_r + tool.R;
      const double r_xy = sphere_r + reach * max_normal_xy;
      const double jlo_f = std::max(std::ceil((centre.y() - r_xy - y0) / gy), static_cast<double>(j0));
      const double jhi_f = std::min(std::floor((centre.y() + r_xy - y0) / gy), static_cast<double>(j1) - 1.0);
      const double ilo_f = std::max(std::ceil((centre.x() - r_xy - x0) / gx), 0.0);
      const double ihi_f = std::min(std::floor((centre.x() + r_xy - x0) / gx), static_cast<double>(nx) - 1.0);
      if (jlo_f > jhi_f || ilo_f > ihi_f) continue;
      for (auto j = static_cast<std::size_t>(jlo_f); j <= static_cast<std::size_t>(jhi_f); ++j) {
        bool changed = false;
        for (auto i = static_cast<std::size_t>(ilo_f); i <= static_cast<std::size_t>(ihi_f); ++i) {
          const std::size_t idx = j * nx + i;
          const Vec3& n = net.normal(idx);
          const Vec3 rel = centre - net.anchor(idx);
          const double tc = rel.dot(n);
          if ((rel - tc * n).squaredNorm() > sphere_r * sphere_r) continue;
          const double enter = tc - sphere_r;
          if (enter >= off[idx]) continue;  // cutter entirely above the material on this line
          const std::size_t before = cnt.updates;
          process_cell(idx, ps, enter - 1e-6, cnt);
          changed |= cnt.updates != before;
        }
        if (changed) row_dirty[j] = 1;
      }
    }
    refresh_rows(j0, j1);
  }

  void assign_bound_maps(std::span<const SampledToolState> states,
                         std::vector<PreparedState>& prepared) {
    if (!options.bound_map || mesh || !net.is_planar()) return;
    constexpr std::size_t kMinRun = 32;
    std::size_t k = 0;
    while (k < states.size()) {
      std::size_t e = k + 1;
      // Sampled axes carry rounding noise; the map's 1e-9 slack covers 1e-12.
      while (e < states.size() &&
             (states[e].state.axis - states[k].state.axis).cwiseAbs().maxCoeff() <= 1e-12) {
        ++e;
      }
      const Vec3& axis = states[k].state.axis;
      if (e - k >= kMinRun && axis.normalized().z() > 0.2) {
        std::shared_ptr<const BoundMap> map;
        for (const auto& cached : map_cache) {
          if ((cached->axis - axis).cwiseAbs().maxCoeff() <= 1e-12) map = cached;
        }
        if (!map) {
          map = build_bound_map(cutter, axis);
          map_cache.push_back(map);
          if (map_cache.size() > 8) map_cache.erase(map_cache.begin());
        }
        for (std::size_t q = k; q < e; ++q) prepared[q].bound = map.get();
      }
      k = e;
    }
  }
};

NBufferEngine::NBufferEngine(LineNet& net, const ToolDefinition& tool, SimulationMode mode,
                             EngineOptions options)
    : net_(net), impl_(std::make_unique<Impl>(net, tool, mode, options)) {
  stats_.total_cells = net.size();
  if (tool.mesh) stats_.degenerate_triangles = tool.mesh->degenerate_count();
}

NBufferEngine::~NBufferEngine() = default;

void NBufferEngine::cut(std::span<const SampledToolState> states) {
  if (states.empty()) return;
  std::vector<PreparedState> prepared;
  prepared.reserve(states.size());
  for (const auto& s : states) prepared.push_back(impl_->prepare(s));
  impl_->assign_bound_maps(states, prepared);
  // Bound maps referenced by `prepared` stay alive in the cache for this call.
  std::vector<std::shared_ptr<const BoundMap>> keep = impl_->map_cache;

  const std::size_t ny = net_.ny();
  const unsigned threads = std::max(1u, std::min<unsigned>(impl_->options.threads,
                                                           static_cast<unsigned>(ny)));
  std::vector<Counters> counters(threads);
  auto band = [&](unsigned t) {
    const std::size_t j0 = ny * t / threads;
    const std::size_t j1 = ny * (t + 1) / threads;
    if (net_.is_planar()) {
      impl_->run_planar_band(prepared, j0, j1, counters[t]);
    } else {
      impl_->run_general_band(prepared, j0, j1, counters[t]);
    }
  };
  if (threads == 1) {
    band(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(band, t);
    for (auto& th : pool) th.join();
  }
  stats_.states += states.size();
  for (const Counters& c : counters) {
    stats_.candidate_cells += c.candidates;
    stats_.hits += c.hits;
    stats_.updates += c.updates;
  }
}

void cut_sample(LineNet& net, const SampledToolState& state, const ToolDefinition& tool,
                const SimulationMode& mode) {
  NBufferEngine engine(net, tool, mode);
  engine.cut(state);
}

HeightField heightfield_from_net(const LineNet& net) {
  const auto& off = net.offsets();
  const auto& touched = net.touched();
  double lo = kInf;
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (touched[k]) lo = std::min(lo, off[k]);
  }
  if (!std::isfinite(lo)) throw SimulationError("simulation: the tool never touched the grid");
  HeightField hf(net.nx(), net.ny(), net.spacing_x(), net.spacing_y());
  hf.x0 = net.x0();
  hf.y0 = net.y0();
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (touched[k]) {
      hf.heights[k] = (off[k] - lo) * 1000.0;
    } else {
      hf.valid[k] = 0;
      hf.heights[k] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return hf;
}

HeightField raw_offsets(const LineNet& net) {
  HeightField hf(net.nx(), net.ny(), net.spacing_x(), net.spacing_y());
  hf.x0 = net.x0();
  hf.y0 = net.y0();
  for (std::size_t k = 0; k < net.size(); ++k) hf.heights[k] = net.offsets()[k] * 1000.0;
  return hf;
}

HeightField simulate(LineNet& net, std::span<const SampledToolState> states,
                     const ToolDefinition& tool, const SimulationMode& mode,
                     const EngineOptions& options, SimulationStats* stats) {
  if (states.empty()) throw DomainError("simulate: at least one tool state is required");
  NBufferEngine engine(net, tool, mode, options);
  engine.cut(states);
  if (stats) *stats = engine.stats();
  return heightfield_from_net(net);
}

}  // namespace surftopo
