#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rekey/queries.hpp"

namespace rekey {

/// Monte Carlo estimate with a normal-approximation 95% confidence interval.
struct SimEstimate {
  double mean = 0.0;
  double ci95_halfwidth = 0.0;
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
  std::string rng_name;
};

struct PathEvent {
  double time = 0.0;
  StateIndex state = 0;
  int action = -1;  // -1 for the initial entry
};

using Trajectory = std::vector<PathEvent>;

/// Direct stochastic simulation: exponential holding times raced against the
/// state's total exit rate, next transition picked proportionally to rate.
/// Deterministic for a fixed seed. An absorbing state ends the trajectory.
Trajectory simulate_path(const Ctmc& ctmc, std::uint64_t seed, double t_max);

struct SimOptions {
  std::int64_t n_paths = 100000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency; results do not depend on it
  double longrun_horizon_days = 36000.0;  // Q2/Q4 single-path horizon
  double burnin_fraction = 0.1;           // Q2 burn-in
  int batches = 32;                       // Q2 batch-means batches
};

/// Fraction of paths compromised at the instant 30*t_months.
SimEstimate estimate_q1(const Ctmc& ctmc, int t_months, const SimOptions& opt);

/// Time average of the compromised indicator over one long path.
SimEstimate estimate_q2(const Ctmc& ctmc, const SimOptions& opt);

/// Fraction of compromise episodes lasting at least 30*t_months days, started
/// from the state the numerical engine identifies as the recovery-risk
/// maximizer. Mean is a probability in [0, 1].
SimEstimate estimate_q3(const Ctmc& ctmc, int t_months, const SimOptions& opt,
                        const SolverSettings& settings = {});

/// Fraction of reset events fired from compromised states over one long path
/// (the useful-reset fraction, in [0, 1]).
SimEstimate estimate_q4_useful(const Ctmc& ctmc, const SimOptions& opt);

/// Dispatch on the query kind; t_months is ignored for Q2/Q4.
SimEstimate estimate(Query query, const Ctmc& ctmc, int t_months,
                     const SimOptions& opt, const SolverSettings& settings = {});

}  // namespace rekey
