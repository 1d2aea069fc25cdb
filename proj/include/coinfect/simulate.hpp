#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "coinfect/equilibria.hpp"

namespace coinfect {

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  double max_error = 0.0;  // largest scaled local-error estimate among accepted steps
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  StepStats stats;
};

struct IntegrateOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  bool include_R = true;
  int n_samples = 200;               // used when sample_times is empty
  std::vector<double> sample_times;  // strictly increasing, within [0, t_end]
};

// Adaptive embedded Runge-Kutta 5(4) with dense output at the sample times.
// Throws StepUnderflow or NonFinite on failure.
Trajectory integrate(const ModelParams& p, const State& initial, double t_end,
                     const IntegrateOptions& opts = {});

// Observer form: called after every accepted step; return false to stop.
using StepObserver = std::function<bool(double t, const State& y)>;
void integrate_observe(const ModelParams& p, const State& initial, double t_end,
                       const IntegrateOptions& opts, const StepObserver& obs);

// Limit of the removed class at an equilibrium of the reduced system.
double r_limit(const ModelParams& p, const Equilibrium& eq);

struct BasinProbeResult {
  double fraction = 0.0;
  int converged = 0;
  int total = 0;
};

struct BasinProbeOptions {
  double t_end = 1e4;
  // tolerances one decade below the convergence threshold so the step-noise
  // floor cannot straddle it
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  // convergence: max-norm relative distance below this, sustained over the
  // trailing tenth of the elapsed horizon
  double distance_tol = 1e-6;
};

// Fraction of random perturbations (relative radius) that flow back to the
// given point. Serial reference and OpenMP kernel give identical counts for
// identical (n, seed).
BasinProbeResult basin_probe_serial(const ModelParams& p, double K, const Equilibrium& point,
                                    int n_samples, double radius, std::uint64_t seed,
                                    const BasinProbeOptions& opts = {});
BasinProbeResult basin_probe_omp(const ModelParams& p, double K, const Equilibrium& point,
                                 int n_samples, double radius, std::uint64_t seed,
                                 const BasinProbeOptions& opts = {});
BasinProbeResult basin_probe(const ModelParams& p, double K, const Equilibrium& point,
                             int n_samples, double radius, std::uint64_t seed,
                             const BasinProbeOptions& opts = {});

}  // namespace coinfect
