#pragma once

#include <set>
#include <string>
#include <vector>

#include "rekey/expr.hpp"

namespace rekey {

/// Bounded integer state variable; booleans use the range [0..1].
struct StateVar {
  std::string name;
  Value lo = 0;
  Value hi = 0;
  Value init = 0;

  static StateVar integer(std::string name, Value lo, Value hi, Value init);
  static StateVar boolean(std::string name, bool init);
};

/// One variable assignment inside a command's update.
struct Assignment {
  std::string var;
  Expr value;
  int index = -1;  // resolved by compose()
};

/// Guarded command: [action] guard -> rate : update.
/// An invalid (default) rate means the implicit rate 1, so passive commands
/// like "[join] true -> true" are well-formed.
struct Command {
  std::string action;
  Expr guard;
  Expr rate;                           // implicit 1 when !rate.valid()
  std::vector<Assignment> updates;     // empty = identity update
};

struct ModuleSpec {
  std::string name;
  std::vector<StateVar> vars;
  std::vector<Command> commands;
};

/// Joint command of the composed system, with all expressions bound to the
/// flattened variable list.
struct JointCommand {
  std::string action;
  int action_id = -1;
  Expr guard;
  Expr rate;
  std::vector<Assignment> updates;
};

/// Parallel composition of modules synchronizing on shared action labels.
struct CompositeModel {
  std::vector<StateVar> vars;          // flattened, in module order
  Valuation init;
  std::vector<std::string> actions;    // sorted label table
  std::vector<JointCommand> commands;
  std::set<std::string> sync_actions;  // labels appearing in >= 2 modules
};

/// Composes modules. A synchronized action fires only when every module
/// mentioning it has an enabled command; the joint rate is the product of the
/// component rates and the joint update applies all component updates (their
/// variable sets are disjoint by construction).
CompositeModel compose(const std::vector<ModuleSpec>& modules);

}  // namespace rekey
