#include "rekey/queries.hpp"

#include <algorithm>
#include <cmath>

#include "rekey/errors.hpp"

namespace rekey {

namespace {

double label_mass(const Ctmc& ctmc, const Distribution& pi,
                  const std::string& label) {
  const auto& bits = ctmc.label(label);
  double mass = 0.0;
  for (std::size_t s = 0; s < pi.size(); ++s) {
    if (bits[s]) mass += pi[s];
  }
  return mass;
}

}  // namespace

double q1_confidentiality(const Ctmc& ctmc, int t_months,
                          const SolverSettings& settings) {
  if (t_months < 0) throw QueryError("t_months must be >= 0");
  auto pi = transient_forward(ctmc, point_distribution(ctmc.num_states(), ctmc.init),
                              30.0 * t_months, settings);
  return label_mass(ctmc, pi, kCompromisedLabel);
}

std::vector<double> q1_curve(const Ctmc& ctmc, int duration_months,
                             int month_step, const SolverSettings& settings) {
  if (duration_months < 1 || month_step < 1) {
    throw QueryError("q1 curve needs duration >= 1 and step >= 1");
  }
  TransientPropagator prop(ctmc, settings);
  Distribution pi = point_distribution(ctmc.num_states(), ctmc.init);
  std::vector<double> values;
  for (int month = month_step; month <= duration_months; month += month_step) {
    prop.advance(pi, 30.0 * month_step);
    values.push_back(label_mass(ctmc, pi, kCompromisedLabel));
  }
  return values;
}

double q2_longrun(const Ctmc& ctmc, const SolverSettings& settings) {
  return label_mass(ctmc, steady_state(ctmc, settings), kCompromisedLabel);
}

RecoveryDetail q3_recovery_detail(const Ctmc& ctmc, int t_months,
                                  const SolverSettings& settings) {
  if (t_months < 0) throw QueryError("t_months must be >= 0");
  const auto& comp = ctmc.label(kCompromisedLabel);
  const auto& not_comp = ctmc.label(kUncompromisedLabel);
  if (std::find(comp.begin(), comp.end(), 1) == comp.end()) {
    throw QueryError("filter set empty: no reachable compromised state");
  }

  // Phase 2: probability of eventually recovering at all, then phase 1: stay
  // compromised throughout [0, 30 t] and still recover afterwards.
  std::vector<double> w = unbounded_until(ctmc, comp, not_comp, settings);
  for (std::size_t s = 0; s < w.size(); ++s) {
    if (!comp[s]) w[s] = 0.0;
  }
  w = transient_backward(ctmc, std::move(w), 30.0 * t_months, comp, settings);

  RecoveryDetail detail;
  detail.max_probability = -1.0;
  for (StateIndex s = 0; s < ctmc.num_states(); ++s) {
    if (comp[s] && w[s] > detail.max_probability) {
      detail.max_probability = w[s];
      detail.argmax_state = s;
    }
  }
  return detail;
}

double q3_recovery(const Ctmc& ctmc, int t_months,
                   const SolverSettings& settings) {
  return q3_recovery_detail(ctmc, t_months, settings).max_probability;
}

std::vector<double> q3_curve(const Ctmc& ctmc, int duration_months,
                             int month_step, const SolverSettings& settings) {
  if (duration_months < 1 || month_step < 1) {
    throw QueryError("q3 curve needs duration >= 1 and step >= 1");
  }
  const auto& comp = ctmc.label(kCompromisedLabel);
  const auto& not_comp = ctmc.label(kUncompromisedLabel);
  if (std::find(comp.begin(), comp.end(), 1) == comp.end()) {
    throw QueryError("filter set empty: no reachable compromised state");
  }

  std::vector<double> w = unbounded_until(ctmc, comp, not_comp, settings);
  for (std::size_t s = 0; s < w.size(); ++s) {
    if (!comp[s]) w[s] = 0.0;
  }
  RestrictedPropagator prop(ctmc, comp, settings);
  std::vector<double> values;
  for (int month = month_step; month <= duration_months; month += month_step) {
    prop.advance(w, 30.0 * month_step);
    double best = 0.0;
    for (StateIndex s = 0; s < ctmc.num_states(); ++s) {
      if (comp[s]) best = std::max(best, w[s]);
    }
    values.push_back(best);
  }
  return values;
}

namespace {

struct ResetRates {
  double all = 0.0;
  double useful = 0.0;
  double useless = 0.0;
};

ResetRates longrun_reward_rates(const Ctmc& ctmc,
                                const SolverSettings& settings) {
  const Distribution pi = steady_state(ctmc, settings);
  const auto& all = ctmc.reward(kAllResetsReward);
  const auto& useful = ctmc.reward(kUsefulResetsReward);
  const auto& useless = ctmc.reward(kUselessResetsReward);

  ResetRates rates;
  for (std::size_t t = 0; t < ctmc.num_transitions(); ++t) {
    const auto& tr = ctmc.transitions[t];
    const double flow = pi[tr.src] * tr.rate;
    rates.all += flow * all[t];
    rates.useful += flow * useful[t];
    rates.useless += flow * useless[t];
  }
  return rates;
}

}  // namespace

Efficiency q4_efficiency(const Ctmc& ctmc, const SolverSettings& settings) {
  const ResetRates rates = longrun_reward_rates(ctmc, settings);
  if (rates.all <= 0.0) {
    throw QueryError("no resets in steady state");
  }
  return Efficiency{100.0 * rates.useful / rates.all,
                    100.0 * rates.useless / rates.all};
}

double longrun_reset_rate(const Ctmc& ctmc, const SolverSettings& settings) {
  return longrun_reward_rates(ctmc, settings).all;
}

QueryResult evaluate_query(Query query, const Ctmc& ctmc,
                           std::optional<int> t_months,
                           const SolverSettings& settings) {
  QueryResult result;
  result.query = query;
  switch (query) {
    case Query::kQ1:
      if (!t_months) throw QueryError("q1 needs a month instant");
      result.t_months = t_months;
      result.value = q1_confidentiality(ctmc, *t_months, settings);
      break;
    case Query::kQ2:
      result.value = q2_longrun(ctmc, settings);
      break;
    case Query::kQ3:
      if (!t_months) throw QueryError("q3 needs a month tail");
      result.t_months = t_months;
      result.value = q3_recovery(ctmc, *t_months, settings);
      break;
    case Query::kQ4: {
      const Efficiency eff = q4_efficiency(ctmc, settings);
      result.value = eff.useful_pct;
      result.value2 = eff.useless_pct;
      break;
    }
  }
  return result;
}

}  // namespace rekey
