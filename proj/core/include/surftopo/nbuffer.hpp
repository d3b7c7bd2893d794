#pragma once

#include "surftopo/heightfield.hpp"
#include "surftopo/surface.hpp"
#include "surftopo/tool.hpp"
#include "surftopo/trajectory.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace surftopo {

struct SimulationMode {
  enum class Kind { kEnvelope, kToothGated };

  Kind kind = Kind::kToothGated;
  // Spatial pre-filter radius around the tool axis; values below R are
  // raised to R.
  double cull_radius = 0.0;
  // Tooth windows are extended past their end by this fraction of their
  // length. Between samples a cell's azimuth drifts by |tip step| / rho, so
  // without overlap cells can slip between consecutive windows and stay
  // uncut; an overlap of 1 closes the gap for hits farther than
  // fz / (2 pi) from the axis.
  double window_overlap = 1.0;

  static SimulationMode envelope() { return {Kind::kEnvelope, 0.0, 1.0}; }
  static SimulationMode tooth_gated(double overlap = 1.0) { return {Kind::kToothGated, 0.0, overlap}; }
};

// Switches for the pure-speedup paths; results do not depend on them.
struct EngineOptions {
  unsigned threads = 1;
  bool sector_raster = true;  // rasterise only the swept tooth sector (plane nets)
  bool bound_map = true;      // convex lower-envelope rejection (plane nets, analytic tool)
};

struct SimulationStats {
  std::size_t states = 0;
  std::size_t candidate_cells = 0;  // cells reaching the exact intersection test
  std::size_t hits = 0;             // intersections that passed tooth gating
  std::size_t updates = 0;          // cells whose cut offset decreased
  std::size_t degenerate_triangles = 0;
  std::size_t total_cells = 0;

  // Fraction of (state, cell) pairs skipped before the exact test.
  double culled_fraction() const;
  std::string to_json() const;
};

// Sweeps sampled tool states through a line net, truncating each line at
// its first cutter intersection. The net is borrowed and updated in place.
class NBufferEngine {
 public:
  NBufferEngine(LineNet& net, const ToolDefinition& tool, SimulationMode mode,
                EngineOptions options = {});
  ~NBufferEngine();
  NBufferEngine(const NBufferEngine&) = delete;
  NBufferEngine& operator=(const NBufferEngine&) = delete;

  void cut(std::span<const SampledToolState> states);
  void cut(const SampledToolState& state) { cut(std::span<const SampledToolState>(&state, 1)); }

  const SimulationStats& stats() const { return stats_; }
  const LineNet& net() const { return net_; }

 private:
  struct Impl;
  LineNet& net_;
  SimulationStats stats_;
  std::unique_ptr<Impl> impl_;
};

// Single-state update of the net.
void cut_sample(LineNet& net, const SampledToolState& state, const ToolDefinition& tool,
                const SimulationMode& mode);

// Heights (um) of touched cells relative to the lowest cut; untouched cells
// masked. Throws SimulationError when no cell was touched.
HeightField heightfield_from_net(const LineNet& net);

// Raw cut offsets c (um) of every cell, untouched cells included.
HeightField raw_offsets(const LineNet& net);

// Folds all states through a fresh engine and returns the (unlevelled)
// height field.
HeightField simulate(LineNet& net, std::span<const SampledToolState> states,
                     const ToolDefinition& tool, const SimulationMode& mode,
                     const EngineOptions& options = {}, SimulationStats* stats = nullptr);

}  // namespace surftopo
