#pragma once

#include <cstdint>

#include "nstorus/errors.hpp"

namespace nstorus {

/// Run parameters shared by the solver and the certification machinery.
struct SolverConfig {
  int dim = 2;               // torus dimension n >= 2
  int trunc = 16;            // spectral truncation N (cube |k|_inf <= N)
  double viscosity = 1.0;    // nu > 0
  double smoothness = 2.0;   // index s of the H_s data norm
  double horizon = 1.0;      // final time T > 0
  int time_grid = 64;        // number of cells M >= 2 (M+1 nodes)
  double picard_tol = 1e-10;       // fixed-point residual target
  double quad_tol = 1e-6;          // grid-doubling Richardson target
  int max_iterations = 200;        // fixed-point sweep cap
  int threads = 1;                 // convolution worker threads

  void validate() const {
    if (dim < 2) throw ConfigError("dim", "config.dim must be >= 2");
    if (trunc < 1) throw ConfigError("trunc", "config.trunc must be >= 1");
    if (viscosity <= 0) throw ConfigError("viscosity", "config.viscosity must be > 0");
    if (horizon <= 0) throw ConfigError("horizon", "config.horizon must be > 0");
    if (time_grid < 2) throw ConfigError("time_grid", "config.time_grid must be >= 2");
    if (picard_tol <= 0) throw ConfigError("picard_tol", "config.picard_tol must be > 0");
    if (quad_tol <= 0) throw ConfigError("quad_tol", "config.quad_tol must be > 0");
    if (max_iterations < 1)
      throw ConfigError("max_iterations", "config.max_iterations must be >= 1");
    if (threads < 1) throw ConfigError("threads", "config.threads must be >= 1");
  }
};

}  // namespace nstorus
