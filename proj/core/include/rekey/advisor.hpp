#pragma once

#include <map>
#include <optional>
#include <vector>

#include "rekey/queries.hpp"

namespace rekey {

/// A design requirement the chosen key-update policy must satisfy.
struct Requirement {
  enum class Kind {
    kConfidentialityAtAllTimes,  // Q1 at every month in [1, horizon] and Q2
    kSteadyState,                // Q2 only
    kRecovery,                   // Q3 at tail_months
    kEfficiencyUseless,          // Q4 useless percentage
  };

  Kind kind = Kind::kConfidentialityAtAllTimes;
  double bound = 1.0;   // probability, or percentage for kEfficiencyUseless
  int tail_months = 0;  // kRecovery only
};

/// A strategy considered by the advisor together with its candidate
/// thresholds.
struct Candidate {
  Strategy strategy = Strategy::kTime;
  double r_reset = 1.0 / 24.0;
  std::vector<int> thresholds;
};

/// One evaluated check: which query was run for which requirement, the value
/// it produced and whether it satisfied the bound.
struct EvidenceRow {
  Strategy strategy = Strategy::kTime;
  int threshold = 0;
  std::size_t requirement = 0;  // index into the requirements vector
  Query query = Query::kQ1;
  std::optional<int> t_months;
  double value = 0.0;
  bool pass = false;
};

struct Advice {
  std::map<Strategy, std::vector<int>> satisfying;
  bool has_solution = false;
  Strategy chosen_strategy = Strategy::kTime;
  int chosen_threshold = 0;
  double chosen_resets_per_year = 0.0;
  std::vector<EvidenceRow> evidence;
};

/// Evaluates every requirement for every candidate (strategy, threshold) and
/// intersects the satisfying sets. Among all satisfying configurations the
/// advisor picks the largest threshold (fewest updates, least power); equal
/// thresholds across strategies are broken by the lower long-run reset rate.
/// An empty result is a valid Advice with has_solution = false.
Advice advise(const ScenarioParams& params,
              const std::vector<Candidate>& candidates,
              const std::vector<Requirement>& requirements, int horizon_months,
              const SolverSettings& settings = {});

/// Largest network size whose confidentiality-at-all-times check (every month
/// in [1, horizon] plus the steady state, strictly below `bound`) passes,
/// found by bisection over the device count. Returns 0 when no size passes
/// and `cap` when every size up to the cap passes.
int max_network_size(const ScenarioParams& params_template,
                     const StrategyConfig& strategy, double bound,
                     int horizon_months, int cap = 1024,
                     const SolverSettings& settings = {});

}  // namespace rekey
