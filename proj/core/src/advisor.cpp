#include "rekey/advisor.hpp"

#include <algorithm>
#include <future>
#include <limits>

#include "rekey/errors.hpp"

namespace rekey {

namespace {

struct ConfigOutcome {
  bool satisfied = true;
  std::vector<EvidenceRow> evidence;
  double resets_per_year = 0.0;  // filled only for satisfying configs
};

void record(ConfigOutcome& out, Strategy strategy, int threshold,
            std::size_t req, Query query, std::optional<int> t_months,
            double value, bool pass) {
  out.evidence.push_back(
      EvidenceRow{strategy, threshold, req, query, t_months, value, pass});
  if (!pass) out.satisfied = false;
}

// Checks Q2 first (cheap) and walks the Q1 curve month by month, stopping at
// the first violation.
bool confidentiality_at_all_times(const Ctmc& ctmc, double bound,
                                  int horizon_months,
                                  const SolverSettings& settings,
                                  ConfigOutcome& out, Strategy strategy,
                                  int threshold, std::size_t req) {
  const double longrun = q2_longrun(ctmc, settings);
  record(out, strategy, threshold, req, Query::kQ2, std::nullopt, longrun,
         longrun < bound);
  if (longrun >= bound) return false;

  TransientPropagator prop(ctmc, settings);
  Distribution pi = point_distribution(ctmc.num_states(), ctmc.init);
  const auto& comp = ctmc.label(kCompromisedLabel);
  for (int month = 1; month <= horizon_months; ++month) {
    prop.advance(pi, 30.0);
    double mass = 0.0;
    for (std::size_t s = 0; s < pi.size(); ++s) {
      if (comp[s]) mass += pi[s];
    }
    record(out, strategy, threshold, req, Query::kQ1, month, mass,
           mass < bound);
    if (mass >= bound) return false;
  }
  return true;
}

ConfigOutcome evaluate_config(const ScenarioParams& params, Strategy strategy,
                              double r_reset, int threshold,
                              const std::vector<Requirement>& requirements,
                              int horizon_months,
                              const SolverSettings& settings) {
  const Ctmc ctmc =
      assemble(params, StrategyConfig{strategy, threshold, r_reset});
  ConfigOutcome out;

  for (std::size_t r = 0; r < requirements.size() && out.satisfied; ++r) {
    const Requirement& req = requirements[r];
    switch (req.kind) {
      case Requirement::Kind::kConfidentialityAtAllTimes:
        confidentiality_at_all_times(ctmc, req.bound, horizon_months, settings,
                                     out, strategy, threshold, r);
        break;
      case Requirement::Kind::kSteadyState: {
        const double value = q2_longrun(ctmc, settings);
        record(out, strategy, threshold, r, Query::kQ2, std::nullopt, value,
               value < req.bound);
        break;
      }
      case Requirement::Kind::kRecovery: {
        double value = 0.0;
        try {
          value = q3_recovery(ctmc, req.tail_months, settings);
        } catch (const QueryError&) {
          // no reachable compromised state: nothing to recover from
          value = 0.0;
        }
        record(out, strategy, threshold, r, Query::kQ3, req.tail_months, value,
               value < req.bound);
        break;
      }
      case Requirement::Kind::kEfficiencyUseless: {
        double value = 0.0;
        try {
          value = q4_efficiency(ctmc, settings).useless_pct;
        } catch (const QueryError&) {
          value = 0.0;  // a policy that never fires wastes no updates
        }
        record(out, strategy, threshold, r, Query::kQ4, std::nullopt, value,
               value < req.bound);
        break;
      }
    }
  }

  if (out.satisfied) {
    out.resets_per_year = 365.0 * longrun_reset_rate(ctmc, settings);
  }
  return out;
}

}  // namespace

Advice advise(const ScenarioParams& params,
              const std::vector<Candidate>& candidates,
              const std::vector<Requirement>& requirements, int horizon_months,
              const SolverSettings& settings) {
  if (candidates.empty()) throw Error("advise needs at least one candidate");
  if (requirements.empty()) throw Error("advise needs at least one requirement");

  struct Job {
    Strategy strategy;
    double r_reset;
    int threshold;
    std::future<ConfigOutcome> result;
  };
  std::vector<Job> jobs;
  for (const auto& candidate : candidates) {
    for (int threshold : candidate.thresholds) {
      jobs.push_back(Job{candidate.strategy, candidate.r_reset, threshold,
                         std::async(std::launch::async, evaluate_config,
                                    std::cref(params), candidate.strategy,
                                    candidate.r_reset, threshold,
                                    std::cref(requirements), horizon_months,
                                    std::cref(settings))});
    }
  }

  Advice advice;
  for (const auto& candidate : candidates) {
    advice.satisfying.emplace(candidate.strategy, std::vector<int>{});
  }

  struct Winner {
    Strategy strategy = Strategy::kTime;
    int threshold = std::numeric_limits<int>::min();
    double resets_per_year = std::numeric_limits<double>::infinity();
  } best;

  for (auto& job : jobs) {
    ConfigOutcome outcome = job.result.get();
    advice.evidence.insert(advice.evidence.end(), outcome.evidence.begin(),
                           outcome.evidence.end());
    if (!outcome.satisfied) continue;
    advice.satisfying[job.strategy].push_back(job.threshold);
    // Largest threshold wins (fewest updates); equal thresholds across
    // strategies fall back to the lower long-run reset rate.
    const bool better =
        job.threshold > best.threshold ||
        (job.threshold == best.threshold &&
         outcome.resets_per_year < best.resets_per_year);
    if (better) {
      best = Winner{job.strategy, job.threshold, outcome.resets_per_year};
      advice.has_solution = true;
    }
  }

  for (auto& [strategy, set] : advice.satisfying) {
    std::sort(set.begin(), set.end());
  }
  if (advice.has_solution) {
    advice.chosen_strategy = best.strategy;
    advice.chosen_threshold = best.threshold;
    advice.chosen_resets_per_year = best.resets_per_year;
  }
  return advice;
}

int max_network_size(const ScenarioParams& params_template,
                     const StrategyConfig& strategy, double bound,
                     int horizon_months, int cap,
                     const SolverSettings& settings) {
  if (!(bound >= 0.0 && bound < 1.0)) {
    throw Error("confidentiality bound must lie in [0, 1)");
  }
  if (cap < 0) throw Error("search cap must be >= 0");

  const std::vector<Requirement> requirement = {
      Requirement{Requirement::Kind::kConfidentialityAtAllTimes, bound, 0}};

  auto passes = [&](int max_devices) {
    ScenarioParams params = params_template;
    params.max = max_devices;
    ConfigOutcome outcome =
        evaluate_config(params, strategy.kind, strategy.r_reset,
                        strategy.threshold, requirement, horizon_months,
                        settings);
    return outcome.satisfied;
  };

  if (passes(cap)) return cap;
  if (!passes(0)) return 0;

  // invariant: lo passes, hi fails
  int lo = 0;
  int hi = cap;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (passes(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace rekey
