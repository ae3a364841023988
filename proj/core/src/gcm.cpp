#include "rekey/gcm.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "rekey/errors.hpp"

namespace rekey {

StateVar StateVar::integer(std::string name, Value lo, Value hi, Value init) {
  if (lo > hi || init < lo || init > hi) {
    throw ModelError("variable '" + name + "' has init outside [lo..hi]");
  }
  return StateVar{std::move(name), lo, hi, init};
}

StateVar StateVar::boolean(std::string name, bool init) {
  return StateVar{std::move(name), 0, 1, init ? 1 : 0};
}

namespace {

struct ActionGroup {
  // commands per module, only for modules that mention the action
  std::vector<std::vector<const Command*>> per_module;
  int module_count = 0;
};

Expr bound_rate(const Command& cmd,
                const std::unordered_map<std::string, int>& index_of) {
  // A command written without an explicit rate has rate 1.
  if (!cmd.rate.valid()) return Expr::constant(1.0);
  return cmd.rate.bind(index_of);
}

}  // namespace

CompositeModel compose(const std::vector<ModuleSpec>& modules) {
  if (modules.empty()) throw CompositionError("no modules to compose");

  CompositeModel model;
  std::unordered_map<std::string, int> index_of;
  for (const auto& m : modules) {
    for (const auto& v : m.vars) {
      if (index_of.count(v.name)) {
        throw CompositionError("duplicate variable name '" + v.name +
                               "' in module '" + m.name + "'");
      }
      index_of.emplace(v.name, static_cast<int>(model.vars.size()));
      model.vars.push_back(v);
      model.init.push_back(v.init);
    }
  }

  // Group commands by action label, keeping per-module buckets so that the
  // joint commands of a synchronized action are the cross product of the
  // participating modules' alternatives.
  std::map<std::string, ActionGroup> groups;  // ordered -> sorted action table
  std::vector<const Command*> independent;    // unlabeled commands
  for (const auto& m : modules) {
    std::map<std::string, std::vector<const Command*>> local;
    for (const auto& c : m.commands) {
      if (c.action.empty()) {
        independent.push_back(&c);
      } else {
        local[c.action].push_back(&c);
      }
    }
    for (auto& [action, cmds] : local) {
      auto& group = groups[action];
      group.per_module.push_back(std::move(cmds));
      group.module_count++;
    }
  }

  for (const auto& [action, group] : groups) {
    if (group.module_count >= 2) model.sync_actions.insert(action);
    model.actions.push_back(action);
  }
  if (!independent.empty()) {
    // Internal commands share a reserved empty label.
    model.actions.push_back("");
    std::sort(model.actions.begin(), model.actions.end());
  }
  std::unordered_map<std::string, int> action_id;
  for (std::size_t i = 0; i < model.actions.size(); ++i) {
    action_id.emplace(model.actions[i], static_cast<int>(i));
  }

  auto bind_command = [&](const std::string& action,
                          const std::vector<const Command*>& parts) {
    JointCommand joint;
    joint.action = action;
    joint.action_id = action_id.at(action);
    for (const Command* part : parts) {
      Expr guard = part->guard.valid() ? part->guard.bind(index_of)
                                       : Expr::boolean(true);
      Expr rate = bound_rate(*part, index_of);
      joint.guard = joint.guard.valid() ? (joint.guard && guard) : guard;
      joint.rate = joint.rate.valid() ? (joint.rate * rate) : rate;
      for (const auto& a : part->updates) {
        auto it = index_of.find(a.var);
        if (it == index_of.end()) {
          throw CompositionError("update targets unknown variable '" + a.var +
                                 "'");
        }
        joint.updates.push_back(
            Assignment{a.var, a.value.bind(index_of), it->second});
      }
    }
    model.commands.push_back(std::move(joint));
  };

  for (const auto& [action, group] : groups) {
    // Cross product over the participating modules' command lists.
    std::vector<std::size_t> pick(group.per_module.size(), 0);
    while (true) {
      std::vector<const Command*> parts;
      parts.reserve(pick.size());
      for (std::size_t m = 0; m < pick.size(); ++m) {
        parts.push_back(group.per_module[m][pick[m]]);
      }
      bind_command(action, parts);
      std::size_t m = 0;
      for (; m < pick.size(); ++m) {
        if (++pick[m] < group.per_module[m].size()) break;
        pick[m] = 0;
      }
      if (m == pick.size()) break;
    }
  }
  for (const Command* c : independent) {
    bind_command("", {c});
  }

  return model;
}

}  // namespace rekey
