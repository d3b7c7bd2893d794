#include "surftopo/areal.hpp"
#include "surftopo/nbuffer.hpp"
#include "surftopo/paths.hpp"
#include "surftopo/plane_job.hpp"
#include "surftopo/tool.hpp"
#include "surftopo/trajectory.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

using namespace surftopo;

namespace {

const ToolDefinition kTool = ToolDefinition::filleted(5.0, 1.5);

void BM_LineCutterIntersection(benchmark::State& st) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  ToolState s;
  s.axis = oriented_axis(0.3, deg2rad(10.0));
  std::vector<Vec3> origins(1024);
  for (auto& o : origins) o = Vec3(u(rng), u(rng), -20.0);
  std::size_t k = 0, hits = 0;
  for (auto _ : st) {
    const auto h = line_cutter_intersection(origins[k++ & 1023], Vec3::UnitZ(), s, kTool);
    hits += h.has_value();
    benchmark::DoNotOptimize(h);
  }
  st.counters["hit_rate"] = static_cast<double>(hits) / static_cast<double>(st.iterations());
}
BENCHMARK(BM_LineCutterIntersection);

// One straight tooth-gated pass across a square plane net.
void BM_EnginePass(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Vec3 axis = oriented_axis(0.0, deg2rad(10.0));
  Trajectory t;
  t.spindle_speed = 14800.0 * kRpmToRadPerSecond;
  t.postures = plane_line_postures(0.0, 1.5, -6.0, 9.0, deg2rad(10.0), kTool, 15.0,
                                   FeedProfile::constant(4.0 * kMetersPerMinuteToMmPerSecond));
  const auto states = sample_trajectory(t, deg2rad(1.0));
  const LineNet fresh = make_plane_net(0.0, {0.0, 3.0, 0.0, 3.0}, n, n, 0.05);
  for (auto _ : st) {
    st.PauseTiming();
    LineNet net = fresh;
    st.ResumeTiming();
    NBufferEngine engine(net, kTool, SimulationMode::tooth_gated());
    engine.cut(states);
    benchmark::DoNotOptimize(net.offsets().data());
  }
  st.counters["states"] = static_cast<double>(states.size());
  st.counters["cells"] = static_cast<double>(n * n);
}
BENCHMARK(BM_EnginePass)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

HeightField noise_field(std::size_t n) {
  HeightField hf(n, n, 0.01, 0.01);
  std::mt19937 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& z : hf.heights) z = g(rng);
  return hf;
}

void BM_AutocorrelationFft(benchmark::State& st) {
  const HeightField hf = noise_field(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(autocorrelation_fft(hf));
}
BENCHMARK(BM_AutocorrelationFft)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ComputeAll(benchmark::State& st) {
  const HeightField hf = noise_field(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(compute_all(hf));
}
BENCHMARK(BM_ComputeAll)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
