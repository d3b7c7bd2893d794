#include "surftopo_cli/commands.hpp"

#include "surftopo/analytic.hpp"
#include "surftopo/areal.hpp"
#include "surftopo/errors.hpp"
#include "surftopo/paths.hpp"
#include "surftopo/plane_job.hpp"
#include "surftopo/tool_mesh.hpp"
#include "surftopo/trajectory.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace surftopo::cli {

namespace fs = std::filesystem;

namespace {

ToolDefinition load_tool(const RunConfig& c) {
  ToolDefinition tool = c.tool;
  if (!c.mesh_path.empty()) {
    tool.mesh = std::make_shared<const ToolMesh>(read_stl_ascii(c.mesh_path));
    try {
      tool.validate();
    } catch (const DomainError& e) {
      throw ParseError(c.mesh_path + ": " + e.what());
    }
  }
  return tool;
}

EngineOptions engine_options(const RunConfig& c) {
  EngineOptions o;
  o.threads = c.threads;
  return o;
}

double spindle_speed(const RunConfig& c) {
  const double vf = c.vf_m_per_min * kMetersPerMinuteToMmPerSecond;
  if (c.fz_mm) return kTwoPi * vf / (*c.fz_mm * c.tool.tooth_count);
  return c.spindle_rpm * kRpmToRadPerSecond;
}

SimulationOutcome run_plane(const RunConfig& c) {
  PlanePassJob job;
  job.tool = load_tool(c);
  job.yaw_deg = c.yaw_deg;
  job.tilt_deg = c.tilt_deg;
  job.stepover_mm = job_stepover(c);
  job.vf_m_per_min = c.vf_m_per_min;
  job.fz_mm = c.fz_mm.value_or(0.0);
  job.spindle_rpm = c.spindle_rpm;
  job.d_alpha_deg = c.dalpha_deg;
  job.z0 = c.surface.z0;
  job.stock_mm = c.stock_mm;
  job.nx = c.nx;
  job.ny = c.ny;
  job.window_mm = c.window_mm;
  job.mode = c.mode;
  job.engine = engine_options(c);
  PlanePassResult r = run_plane_passes(job);
  return {std::move(r.field), std::move(r.offsets), r.stats};
}

SimulationOutcome run_states(const RunConfig& c, const ToolDefinition& tool,
                             const std::vector<std::vector<ToolPosture>>& paths) {
  LineNet net = make_net(c.surface, c.bounds, c.nx, c.ny, c.stock_mm);
  NBufferEngine engine(net, tool, c.mode, engine_options(c));
  double alpha = 0.0;
  for (const auto& postures : paths) {
    Trajectory traj;
    traj.postures = postures;
    traj.spindle_speed = spindle_speed(c);
    SamplingStats st;
    const auto states = sample_trajectory(traj, deg2rad(c.dalpha_deg), alpha, &st);
    alpha = st.alpha_end;
    engine.cut(states);
  }
  SimulationOutcome out;
  out.stats = engine.stats();
  out.field = heightfield_from_net(net);
  out.offsets = raw_offsets(net);
  return out;
}

SimulationOutcome run_trajectory(const RunConfig& c) {
  const ToolDefinition tool = load_tool(c);
  std::vector<ToolPosture> postures = read_trajectory_csv(fs::path(c.trajectory_path));
  Trajectory check;
  check.postures = postures;
  check.spindle_speed = spindle_speed(c);
  try {
    check.validate();
  } catch (const DomainError& e) {
    throw ParseError(c.trajectory_path + ": " + e.what());
  }
  return run_states(c, tool, {postures});
}

SimulationOutcome run_hypar(const RunConfig& c) {
  const ToolDefinition tool = load_tool(c);
  const double vf = c.vf_m_per_min * kMetersPerMinuteToMmPerSecond;
  const FeedProfile feed = c.slow_vf_m_per_min
                               ? FeedProfile::dip(vf, *c.slow_vf_m_per_min * kMetersPerMinuteToMmPerSecond)
                               : FeedProfile::constant(vf);
  const double step = c.rule_count > 1 ? job_stepover(c) : 0.0;
  std::vector<std::vector<ToolPosture>> paths;
  for (std::size_t k = 0; k < c.rule_count; ++k) {
    paths.push_back(hypar_rule_postures(c.surface.k, c.rule_x_mm + static_cast<double>(k) * step,
                                        c.rule_y_from_mm, c.rule_y_to_mm, deg2rad(c.tilt_deg), tool,
                                        c.posture_step_mm, feed));
  }
  return run_states(c, tool, paths);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  ConfigMap map = path.empty() ? ConfigMap() : ConfigMap::load(path);
  for (const auto& o : overrides) map.assign(o);
  return RunConfig::from_map(map);
}

std::optional<RenderRange> parse_range(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("--range expects lo:hi");
  RenderRange r;
  try {
    std::size_t used = 0;
    r.lo = std::stod(s.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("lo");
    const std::string hi = s.substr(colon + 1);
    r.hi = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument("hi");
  } catch (const std::logic_error&) {
    throw ConfigError("--range expects lo:hi with numeric bounds");
  }
  if (!(r.lo < r.hi)) throw ConfigError("--range requires lo < hi");
  return r;
}

// ---- subcommands ----

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const SimulationOutcome r = run_simulation(c);
  const fs::path dir(c.out_dir);
  ensure_dir(dir);
  write_heightfield_csv(r.field, dir / "heights.csv");
  write_heightfield_csv(r.offsets, dir / "offsets.csv");
  write_image(r.field, dir / "heights.pgm");
  write_text(dir / "stats.json", r.stats.to_json() + "\n");
  out << "simulate: " << r.stats.states << " states, " << r.stats.updates << " cell updates, grid "
      << r.field.nx << "x" << r.field.ny << ", outputs in " << dir.string() << "\n";
  return kExitOk;
}

int cmd_analyze(const std::string& path, double sal_threshold, bool csv, std::ostream& out) {
  const HeightField hf = read_heightfield_csv(fs::path(path));
  const ArealParams p = compute_all(hf, sal_threshold);
  if (csv) {
    write_areal_csv({p}, out);
  } else {
    write_areal_report(p, out);
  }
  return kExitOk;
}

int cmd_predict(const MachiningParams& mp, const ToolDefinition& tool, std::ostream& out) {
  mp.validate();
  if (mp.theta_t_deg < 0.0) throw ConfigError("tilt must lie in [0, 90) deg");
  for (RadiusFormula v : {RadiusFormula::kAsPrinted, RadiusFormula::kSinSquaredYaw}) {
    const std::string tag = "req=" + to_string(v);
    std::optional<double> req;
    try {
      req = effective_radius(deg2rad(mp.theta_n_deg), deg2rad(mp.theta_t_deg), tool, v);
    } catch (const SingularOrientationError&) {
    }
    if (!req) {
      out << "Req_mm[" << tag << "] = undef(singular_orientation)\n";
      out << "stepover_mm[" << tag << "] = undef(singular_orientation)\n";
      for (SzBranch b : {SzBranch::kAsPrinted, SzBranch::kHcAdditiveSwapped}) {
        out << "Sz_um[" << tag << ",sz=" << to_string(b) << "] = undef(singular_orientation)\n";
      }
      continue;
    }
    out << "Req_mm[" << tag << "] = " << fixed(*req, 4) << "\n";
    if (mp.stepover) {
      out << "stepover_mm[" << tag << "] = " << fixed(*mp.stepover, 4) << " (given)\n";
    } else if (mp.h_c < *req) {
      out << "stepover_mm[" << tag << "] = " << fixed(stepover_from_scallop(mp.h_c, *req), 4) << "\n";
    } else {
      out << "stepover_mm[" << tag << "] = undef(scallop_exceeds_radius)\n";
    }
    for (SzBranch b : {SzBranch::kAsPrinted, SzBranch::kHcAdditiveSwapped}) {
      const double sz = predict_sz(mp.f_z, mp.h_c, *req, tool.r, b);
      out << "Sz_um[" << tag << ",sz=" << to_string(b) << "] = " << fixed(sz * 1000.0, 3) << "\n";
    }
  }
  return kExitOk;
}

int cmd_doe_table(const std::string& path, const std::string& out_path, std::ostream& out) {
  const DesignTable design = read_design_csv(fs::path(path));
  EffectTable effects;
  try {
    effects = factor_effects(design);
  } catch (const DomainError& e) {
    throw ParseError(path + ": " + e.what());
  }
  write_effect_table(effects, out);
  if (!out_path.empty()) {
    std::ostringstream os;
    write_effect_table(effects, os);
    write_text(out_path, os.str());
  }
  return kExitOk;
}

int cmd_doe_generate(const RunConfig& base, std::ostream& out) {
  DesignTable design = full_factorial(base.doe_levels);
  design.response_names = areal_param_names();
  design.response_names.emplace_back("Sz_analytic_um");
  std::vector<double> analytic, simulated;
  for (auto& row : design.rows) {
    RunConfig c = base;
    c.job = JobKind::kPlanePasses;
    c.yaw_deg = row.levels[0];
    c.tilt_deg = row.levels[1];
    c.hc_mm = row.levels[2];
    c.vf_m_per_min = row.levels[3];
    c.stepover_mm.reset();
    const SimulationOutcome r = run_plane(c);
    const ArealParams p = compute_all(r.field, c.sal_threshold);
    for (const ParamValue& v : areal_param_values(p)) row.responses.push_back(v.defined ? v.value : std::nan(""));
    const double fz = c.fz_mm.value_or(c.vf_m_per_min * kMetersPerMinuteToMmPerSecond * kTwoPi /
                                       (spindle_speed(c) * c.tool.tooth_count));
    const double req = effective_radius(deg2rad(c.yaw_deg), deg2rad(c.tilt_deg), c.tool, c.radius_formula);
    const double sz_a = predict_sz(fz, c.hc_mm, req, c.tool.r, c.sz_branch) * 1000.0;
    row.responses.push_back(sz_a);
    analytic.push_back(sz_a);
    simulated.push_back(p.Sz.value);
    out << "doe: yaw " << c.yaw_deg << " tilt " << c.tilt_deg << " hc " << c.hc_mm << " vf "
        << c.vf_m_per_min << " -> Sz " << fixed(p.Sz.value, 3) << " um\n";
  }
  DesignTable responses = design;
  responses.response_names.pop_back();
  for (auto& row : responses.rows) row.responses.pop_back();
  const EffectTable effects = factor_effects(responses);
  const ErrorStats err = analytic_vs_sim_error(analytic, simulated);
  const fs::path dir(base.out_dir);
  ensure_dir(dir);
  std::ostringstream d, e;
  write_design_csv(design, d);
  write_effect_table(effects, e);
  write_text(dir / "design.csv", d.str());
  write_text(dir / "effects.csv", e.str());
  out << e.str();
  out << "Sz analytic vs simulated: mean abs error " << fixed(err.mean_abs_error, 3) << " um, std "
      << fixed(err.std_dev, 3) << " um\n";
  return kExitOk;
}

int cmd_render(const std::string& path, const std::string& image, const std::string& range,
               std::ostream& out) {
  const auto r = parse_range(range);
  const HeightField hf = read_heightfield_csv(fs::path(path));
  write_image(hf, image, r);
  out << "render: wrote " << image << "\n";
  return kExitOk;
}

int fail(std::ostream& err, int code, const std::string& kind, const std::string& what) {
  std::string msg = what;
  for (char& ch : msg) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  err << "error: " << kind << ": " << msg << "\n";
  return code;
}

}  // namespace

double job_stepover(const RunConfig& c) {
  if (c.stepover_mm) return *c.stepover_mm;
  double req = 0.0;
  try {
    req = effective_radius(deg2rad(c.yaw_deg), deg2rad(c.tilt_deg), c.tool, c.radius_formula);
  } catch (const SingularOrientationError&) {
    throw ConfigError("stepover cannot be derived from job.hc_mm at this orientation; set job.stepover_mm");
  }
  if (!(c.hc_mm < req)) throw ConfigError("job.hc_mm must be below the equivalent radius");
  return stepover_from_scallop(c.hc_mm, req);
}

SimulationOutcome run_simulation(const RunConfig& config) {
  switch (config.job) {
    case JobKind::kPlanePasses:
      return run_plane(config);
    case JobKind::kTrajectory:
      return run_trajectory(config);
    case JobKind::kHyparRules:
      return run_hypar(config);
  }
  throw ConfigError("unknown job kind");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Surface topography simulation for 5-axis milling", "surftopo"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int threads = 0;
  unsigned seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--set", overrides, "override a config key (key=value)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--seed", seed, "seed for noise fixtures (unused by simulations)");
  };

  auto* simulate = app.add_subcommand("simulate", "run the N-buffer simulation");
  add_common(simulate);

  std::string field_path;
  double sal = -1.0;
  bool csv = false;
  auto* analyze = app.add_subcommand("analyze", "areal parameters of a height field CSV");
  analyze->add_option("heightfield", field_path, "height field CSV")->required();
  analyze->add_option("--sal-threshold", sal, "autocorrelation threshold s");
  analyze->add_flag("--csv", csv, "CSV row instead of key = value lines");
  analyze->add_option("--config", config_path, "config file (areal.sal_threshold)");

  MachiningParams mp;
  double tool_R = 5.0, tool_r = 1.5;
  double stepover = 0.0;
  auto* predict = app.add_subcommand("predict", "closed-form Req, stepover and Sz");
  predict->add_option("--yaw", mp.theta_n_deg, "yaw angle, deg")->required();
  predict->add_option("--tilt", mp.theta_t_deg, "tilt angle, deg")->required();
  predict->add_option("--hc", mp.h_c, "scallop height, mm")->required();
  predict->add_option("--fz", mp.f_z, "feed per tooth, mm")->required();
  predict->add_option("--vf", mp.v_f, "feedrate, m/min");
  predict->add_option("--stepover", stepover, "explicit stepover, mm");
  predict->add_option("--R", tool_R, "tool radius, mm");
  predict->add_option("--r", tool_r, "corner radius, mm");

  std::string design_path;
  std::string effects_out;
  bool generate = false;
  auto* doe = app.add_subcommand("doe", "factor effects of a design table");
  doe->add_option("--design", design_path, "design CSV with responses");
  doe->add_option("--effects-out", effects_out, "also write the effect table here");
  doe->add_flag("--generate", generate, "simulate the factorial from the config");
  add_common(doe);

  std::string image_path;
  std::string range;
  auto* render = app.add_subcommand("render", "PGM/PPM image of a height field");
  render->add_option("heightfield", field_path, "height field CSV")->required();
  render->add_option("--image", image_path, "output image (.pgm or .ppm)")->required();
  render->add_option("--range", range, "fixed range lo:hi in um");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, kExitConfig, "usage", e.what());
  }

  try {
    auto make_config = [&]() {
      RunConfig c = load_config(config_path, overrides);
      if (!out_dir.empty()) c.out_dir = out_dir;
      if (threads > 0) c.threads = static_cast<unsigned>(threads);
      return c;
    };
    if (*simulate) return cmd_simulate(make_config(), out);
    if (*analyze) {
      double threshold = 0.2;
      if (!config_path.empty()) threshold = load_config(config_path, {}).sal_threshold;
      if (sal > 0.0) threshold = sal;
      if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("--sal-threshold must lie in (0, 1)");
      return cmd_analyze(field_path, threshold, csv, out);
    }
    if (*predict) {
      ToolDefinition tool = ToolDefinition::filleted(tool_R, tool_r);
      try {
        tool.validate();
      } catch (const DomainError& e) {
        throw ConfigError(e.what());
      }
      if (stepover > 0.0) mp.stepover = stepover;
      try {
        return cmd_predict(mp, tool, out);
      } catch (const DomainError& e) {
        throw ConfigError(e.what());
      }
    }
    if (*doe) {
      if (!design_path.empty()) return cmd_doe_table(design_path, effects_out, out);
      if (!generate) throw ConfigError("doe needs --design FILE or --generate");
      return cmd_doe_generate(make_config(), out);
    }
    if (*render) return cmd_render(field_path, image_path, range, out);
  } catch (const ConfigError& e) {
    return fail(err, kExitConfig, "config", e.what());
  } catch (const ParseError& e) {
    return fail(err, kExitInput, "input", e.what());
  } catch (const IoError& e) {
    return fail(err, kExitInput, "io", e.what());
  } catch (const SimulationError& e) {
    return fail(err, kExitSimulation, "simulation", e.what());
  } catch (const ResourceError& e) {
    return fail(err, kExitSimulation, "resource", e.what());
  } catch (const SingularOrientationError& e) {
    return fail(err, kExitConfig, "config", e.what());
  } catch (const DomainError& e) {
    return fail(err, kExitConfig, "config", e.what());
  }
  return fail(err, kExitConfig, "usage", "no subcommand");
}

}  // namespace surftopo::cli
