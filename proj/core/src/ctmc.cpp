#include "rekey/ctmc.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "rekey/errors.hpp"

namespace rekey {

namespace {

struct ValuationHash {
  std::size_t operator()(const Valuation& v) const {
    std::size_t h = 1469598103934665603ull;
    for (Value x : v) {
      h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(x));
      h *= 1099511628211ull;
    }
    return h;
  }
};

struct Candidate {
  int action = -1;
  double rate = 0.0;
  Valuation succ;
};

}  // namespace

std::vector<double> Ctmc::exit_rates() const {
  std::vector<double> exits(states.size(), 0.0);
  for (const auto& t : transitions) exits[t.src] += t.rate;
  return exits;
}

const std::vector<std::uint8_t>& Ctmc::label(const std::string& name) const {
  auto it = labels.find(name);
  if (it == labels.end()) throw ModelError("unknown label '" + name + "'");
  return it->second;
}

const std::vector<double>& Ctmc::reward(const std::string& name) const {
  auto it = rewards.find(name);
  if (it == rewards.end()) {
    throw ModelError("unknown reward structure '" + name + "'");
  }
  return it->second;
}

int Ctmc::action_id(const std::string& name) const {
  auto it = std::find(actions.begin(), actions.end(), name);
  return it == actions.end() ? -1 : static_cast<int>(it - actions.begin());
}

std::string Ctmc::describe_state(StateIndex s) const {
  std::ostringstream out;
  out << "(";
  const Valuation& v = states[s];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << ", ";
    out << var_names[i] << "=" << v[i];
  }
  out << ")";
  return out.str();
}

Ctmc explore(const CompositeModel& model, const ExploreOptions& options) {
  Ctmc ctmc;
  ctmc.actions = model.actions;
  ctmc.var_names.reserve(model.vars.size());
  for (const auto& v : model.vars) ctmc.var_names.push_back(v.name);

  // Successors are ordered by (action label, successor valuation compared
  // through the name-sorted variable permutation). That makes BFS discovery
  // indices independent of module and command declaration order.
  std::vector<std::size_t> name_order(model.vars.size());
  for (std::size_t i = 0; i < name_order.size(); ++i) name_order[i] = i;
  std::sort(name_order.begin(), name_order.end(),
            [&](std::size_t a, std::size_t b) {
              return model.vars[a].name < model.vars[b].name;
            });
  auto canonical_less = [&](const Valuation& a, const Valuation& b) {
    for (std::size_t i : name_order) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  };

  std::unordered_map<Valuation, StateIndex, ValuationHash> index_of;
  index_of.emplace(model.init, 0);
  ctmc.states.push_back(model.init);
  ctmc.init = 0;
  ctmc.row_offsets.push_back(0);

  std::vector<Candidate> enabled;
  for (StateIndex si = 0; si < ctmc.states.size(); ++si) {
    // states grows while we iterate; copy the valuation to keep it stable
    const Valuation state = ctmc.states[si];
    enabled.clear();

    for (const auto& cmd : model.commands) {
      if (!cmd.guard.eval_bool(state)) continue;
      const double rate = cmd.rate.eval(state);
      if (rate < 0.0) {
        throw ModelError("negative rate " + std::to_string(rate) +
                         " for action '" + cmd.action + "' in state " +
                         ctmc.describe_state(si));
      }
      if (rate == 0.0) continue;

      Valuation succ = state;
      for (const auto& a : cmd.updates) {
        succ[a.index] = static_cast<Value>(a.value.eval(state));
      }
      for (std::size_t i = 0; i < succ.size(); ++i) {
        if (succ[i] < model.vars[i].lo || succ[i] > model.vars[i].hi) {
          throw ModelError("update drives '" + model.vars[i].name +
                           "' out of range in state " + ctmc.describe_state(si));
        }
      }
      enabled.push_back(Candidate{cmd.action_id, rate, std::move(succ)});
    }

    std::sort(enabled.begin(), enabled.end(),
              [&](const Candidate& a, const Candidate& b) {
                if (a.action != b.action) return a.action < b.action;
                return canonical_less(a.succ, b.succ);
              });

    for (std::size_t i = 0; i < enabled.size(); ++i) {
      double rate = enabled[i].rate;
      if (options.merge_parallel) {
        while (i + 1 < enabled.size() &&
               enabled[i + 1].action == enabled[i].action &&
               enabled[i + 1].succ == enabled[i].succ) {
          rate += enabled[i + 1].rate;
          ++i;
        }
      }
      auto [it, inserted] =
          index_of.emplace(enabled[i].succ, static_cast<StateIndex>(ctmc.states.size()));
      if (inserted) ctmc.states.push_back(enabled[i].succ);
      ctmc.transitions.push_back(
          Transition{si, it->second, rate, enabled[i].action});
      if (ctmc.transitions.size() > options.max_transitions) {
        throw ResourceError(
            "state space exceeds the configured budget of " +
            std::to_string(options.max_transitions) + " transitions");
      }
    }
    ctmc.row_offsets.push_back(ctmc.transitions.size());
  }

  for (const auto& def : options.labels) {
    Expr pred = def.predicate;  // label predicates arrive unbound
    std::unordered_map<std::string, int> names;
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
      names.emplace(model.vars[i].name, static_cast<int>(i));
    }
    pred = pred.bind(names);
    std::vector<std::uint8_t> bits(ctmc.states.size(), 0);
    for (StateIndex s = 0; s < ctmc.states.size(); ++s) {
      bits[s] = pred.eval_bool(ctmc.states[s]) ? 1 : 0;
    }
    ctmc.labels.emplace(def.name, std::move(bits));
  }

  for (const auto& def : options.rewards) {
    std::unordered_map<std::string, int> names;
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
      names.emplace(model.vars[i].name, static_cast<int>(i));
    }
    Expr guard = def.guard.valid() ? def.guard.bind(names) : Expr::boolean(true);
    const int action = ctmc.action_id(def.action);
    std::vector<double> values(ctmc.transitions.size(), 0.0);
    for (std::size_t t = 0; t < ctmc.transitions.size(); ++t) {
      const auto& tr = ctmc.transitions[t];
      if (tr.action == action && guard.eval_bool(ctmc.states[tr.src])) {
        values[t] = def.value;
      }
    }
    ctmc.rewards.emplace(def.name, std::move(values));
  }

  return ctmc;
}

}  // namespace rekey
