#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rekey/gcm.hpp"

namespace rekey {

using StateIndex = std::uint32_t;

struct Transition {
  StateIndex src = 0;
  StateIndex dst = 0;
  double rate = 0.0;
  int action = -1;  // index into Ctmc::actions
};

/// Named state predicate attached to an explored chain.
struct LabelDef {
  std::string name;
  Expr predicate;
};

/// Transition reward: `value` on every transition with the given action whose
/// source state satisfies `guard`.
struct RewardDef {
  std::string name;
  std::string action;
  Expr guard;
  double value = 1.0;
};

struct ExploreOptions {
  std::size_t max_transitions = 10'000'000;
  bool merge_parallel = true;  // merge equal (src,dst,action) by rate addition
  std::vector<LabelDef> labels;
  std::vector<RewardDef> rewards;
};

/// Explicit CTMC over the reachable state space. States are indexed in BFS
/// discovery order from the initial state, with successors visited in a
/// canonical order (action label, then successor valuation compared through
/// the name-sorted variable permutation), so indices do not depend on module
/// or command declaration order. Transitions are grouped by source state.
struct Ctmc {
  std::vector<std::string> var_names;
  std::vector<Valuation> states;
  StateIndex init = 0;
  std::vector<std::string> actions;
  std::vector<Transition> transitions;          // sorted by src
  std::vector<std::size_t> row_offsets;         // size states.size()+1
  std::map<std::string, std::vector<std::uint8_t>> labels;
  std::map<std::string, std::vector<double>> rewards;  // per transition

  std::size_t num_states() const { return states.size(); }
  std::size_t num_transitions() const { return transitions.size(); }

  /// Total outgoing rate per state, self-loops included.
  std::vector<double> exit_rates() const;

  const std::vector<std::uint8_t>& label(const std::string& name) const;
  const std::vector<double>& reward(const std::string& name) const;
  int action_id(const std::string& name) const;  // -1 when absent

  std::string describe_state(StateIndex s) const;
};

/// Breadth-first reachability exploration of a composed model. Every enabled
/// joint command with positive rate yields a transition; zero-rate commands
/// are dropped, negative rates and out-of-range updates are ModelErrors.
Ctmc explore(const CompositeModel& model, const ExploreOptions& options = {});

}  // namespace rekey
