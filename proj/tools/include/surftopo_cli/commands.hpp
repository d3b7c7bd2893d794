#pragma once

#include "surftopo/heightfield.hpp"
#include "surftopo/nbuffer.hpp"
#include "surftopo_cli/config.hpp"

#include <iosfwd>

namespace surftopo::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSimulation = 3;

struct SimulationOutcome {
  HeightField field;    // um, relative to the deepest cut
  HeightField offsets;  // raw cut offsets, um
  SimulationStats stats;
};

// Runs the job described by the config.
SimulationOutcome run_simulation(const RunConfig& config);

// Stepover used for plane and rule jobs: explicit, or from h_c and Req.
double job_stepover(const RunConfig& config);

// Entry point shared by the executable and the tests. Diagnostics go to
// `err` as a single `error: ...` line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace surftopo::cli
