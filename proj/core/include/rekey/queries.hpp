#pragma once

#include <optional>
#include <vector>

#include "rekey/solver.hpp"
#include "rekey/zigbee.hpp"

namespace rekey {

struct QueryResult {
  Query query = Query::kQ1;
  std::optional<int> t_months;
  double value = 0.0;
  std::optional<double> value2;  // second percentage for Q4
};

/// Probability that the key is compromised exactly t_months months (30 days
/// each) after start.
double q1_confidentiality(const Ctmc& ctmc, int t_months,
                          const SolverSettings& settings = {});

/// Compromise probability at months step, 2*step, ..., up to
/// duration_months, computed in one incremental forward pass.
std::vector<double> q1_curve(const Ctmc& ctmc, int duration_months,
                             int month_step = 1,
                             const SolverSettings& settings = {});

/// Long-run probability of a compromised key.
double q2_longrun(const Ctmc& ctmc, const SolverSettings& settings = {});

/// Risk that recovery from a compromise takes at least t_months months,
/// maximized over the reachable compromised states.
double q3_recovery(const Ctmc& ctmc, int t_months,
                   const SolverSettings& settings = {});

struct RecoveryDetail {
  double max_probability = 0.0;
  StateIndex argmax_state = 0;
};

RecoveryDetail q3_recovery_detail(const Ctmc& ctmc, int t_months,
                                  const SolverSettings& settings = {});

/// Recovery-risk curve at months step, 2*step, ..., duration_months.
std::vector<double> q3_curve(const Ctmc& ctmc, int duration_months,
                             int month_step = 1,
                             const SolverSettings& settings = {});

struct Efficiency {
  double useful_pct = 0.0;
  double useless_pct = 0.0;
};

/// Long-run percentages of useful and useless resets.
Efficiency q4_efficiency(const Ctmc& ctmc, const SolverSettings& settings = {});

/// Long-run rate of reset events per day (the all_resets reward rate).
double longrun_reset_rate(const Ctmc& ctmc, const SolverSettings& settings = {});

/// Single dispatch over the four query families. t_months is required for
/// q1/q3 and ignored otherwise.
QueryResult evaluate_query(Query query, const Ctmc& ctmc,
                           std::optional<int> t_months,
                           const SolverSettings& settings = {});

}  // namespace rekey
