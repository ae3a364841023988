#include "rekey/zigbee.hpp"

#include <array>

#include "rekey/errors.hpp"

namespace rekey {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kHA: return "ha";
    case Scenario::kSE: return "se";
    case Scenario::kCBA: return "cba";
    case Scenario::kPHHC: return "phhc";
    case Scenario::kTA: return "ta";
    case Scenario::kWSA: return "wsa";
  }
  return "?";
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kTime: return "time";
    case Strategy::kLeave: return "leave";
    case Strategy::kJoin: return "join";
  }
  return "?";
}

std::string to_string(Query q) {
  switch (q) {
    case Query::kQ1: return "q1";
    case Query::kQ2: return "q2";
    case Query::kQ3: return "q3";
    case Query::kQ4: return "q4";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "ha") return Scenario::kHA;
  if (s == "se") return Scenario::kSE;
  if (s == "cba") return Scenario::kCBA;
  if (s == "phhc") return Scenario::kPHHC;
  if (s == "ta") return Scenario::kTA;
  if (s == "wsa") return Scenario::kWSA;
  throw Error("unknown scenario '" + s + "'");
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "time") return Strategy::kTime;
  if (s == "leave") return Strategy::kLeave;
  if (s == "join") return Strategy::kJoin;
  throw Error("unknown strategy '" + s + "'");
}

Query query_from_string(const std::string& s) {
  if (s == "q1") return Query::kQ1;
  if (s == "q2") return Query::kQ2;
  if (s == "q3") return Query::kQ3;
  if (s == "q4") return Query::kQ4;
  throw Error("unknown question '" + s + "'");
}

std::vector<int> ThresholdGrid::values() const {
  if (start > end || step < 1) {
    throw Error("invalid threshold grid " + std::to_string(start) + ":" +
                std::to_string(end) + ":" + std::to_string(step));
  }
  std::vector<int> out;
  for (int v = start; v <= end; v += step) out.push_back(v);
  return out;
}

ScenarioParams scenario_params(Scenario s) {
  switch (s) {
    case Scenario::kHA:
      // fairly static home network, relatively insecure environment
      return {20, 1.0 / 7.0, 1.0 / 365.0, 1.0 / 100.0};
    case Scenario::kSE:
      // small static metering network, highly secure
      return {5, 1.0 / 7.0, 1.0 / 1825.0, 1.0 / 100000.0};
    case Scenario::kCBA:
      return {100, 1.0 / 7.0, 1.0 / 365.0, 1.0 / 1000.0};
    case Scenario::kPHHC:
      // dynamic care network, devices churn monthly
      return {500, 1.0 / 7.0, 1.0 / 30.0, 1.0 / 10000.0};
    case Scenario::kTA:
      return {20, 1.0 / 7.0, 1.0 / 30.0, 1.0 / 100000.0};
    case Scenario::kWSA:
      return {500, 1.0 / 7.0, 1.0 / 180.0, 1.0 / 1000.0};
  }
  throw Error("unknown scenario");
}

namespace {

constexpr const char* kSizeVar = "size";
constexpr const char* kCompVar = "compromised";
constexpr const char* kLeaveCounterVar = "departures";
constexpr const char* kJoinCounterVar = "arrivals";

constexpr const char* kLeaveAction = "leave";
constexpr const char* kLeaveCompAction = "leave_compromise";
constexpr const char* kJoinAction = "join";

}  // namespace

ModuleSpec network_module(const ScenarioParams& p) {
  if (p.max < 0 || p.r_join < 0 || p.r_leave < 0 || p.p_comp < 0 ||
      p.p_comp > 1) {
    throw ModelError("invalid scenario parameters");
  }

  const Expr size = Expr::var(kSizeVar);
  const Expr max = Expr::constant(p.max, "max");
  const Expr r_join = Expr::constant(p.r_join, "r_join");
  const Expr r_leave = Expr::constant(p.r_leave, "r_leave");
  const Expr p_comp = Expr::constant(p.p_comp, "p_comp");
  const Expr one = Expr::constant(1.0);

  ModuleSpec m;
  m.name = "network";
  m.vars = {StateVar::integer(kSizeVar, 0, p.max, p.max),
            StateVar::boolean(kCompVar, false)};
  m.commands = {
      // a departing device usually takes no secret with it
      Command{kLeaveAction, size > Expr::constant(0),
              r_leave * (one - p_comp) * size,
              {Assignment{kSizeVar, size - one}}},
      // ... but sometimes it leaks the network key
      Command{kLeaveCompAction, size > Expr::constant(0),
              r_leave * p_comp * size,
              {Assignment{kSizeVar, size - one},
               Assignment{kCompVar, Expr::boolean(true)}}},
      // free slots refill one device at a time
      Command{kJoinAction, size < max, r_join * (max - size),
              {Assignment{kSizeVar, size + one}}},
      // a key update clears the compromise
      Command{kResetAction, Expr::boolean(true), Expr{},
              {Assignment{kCompVar, Expr::boolean(false)}}},
  };
  return m;
}

ModuleSpec env_module(const StrategyConfig& s) {
  if (s.threshold < 1) throw ModelError("strategy threshold must be >= 1");
  if (!(s.r_reset > 0)) throw ModelError("reset rate must be positive");

  ModuleSpec m;
  const Expr passive = Expr::boolean(true);

  if (s.kind == Strategy::kTime) {
    // Periodic update: reset races with an exponential timer of mean
    // 30 * threshold days; every network action is passive.
    m.name = "env_time";
    const Expr reset_rate =
        Expr::constant(1.0 / (30.0 * static_cast<double>(s.threshold)),
                       "1/(30*threshold)");
    m.commands = {
        Command{kLeaveAction, passive, Expr{}, {}},
        Command{kLeaveCompAction, passive, Expr{}, {}},
        Command{kJoinAction, passive, Expr{}, {}},
        Command{kResetAction, passive, reset_rate, {}},
    };
    return m;
  }

  // Counter strategies: the trust center counts departures (or arrivals) and
  // enables the reset once the threshold is hit; until the reset fires the
  // counter guard blocks every network action.
  const bool on_leave = s.kind == Strategy::kLeave;
  const char* counter_name = on_leave ? kLeaveCounterVar : kJoinCounterVar;
  m.name = on_leave ? "env_leave" : "env_join";

  const Expr counter = Expr::var(counter_name);
  const Expr threshold = Expr::constant(s.threshold, "threshold");
  const Expr below = counter < threshold;
  const Expr bump = counter + Expr::constant(1.0);
  const Expr r_reset = Expr::constant(s.r_reset, "r_reset");

  m.vars = {StateVar::integer(counter_name, 0, s.threshold, 0)};
  std::vector<Assignment> count_up = {Assignment{counter_name, bump}};
  std::vector<Assignment> clear = {
      Assignment{counter_name, Expr::constant(0.0)}};

  if (on_leave) {
    m.commands = {
        Command{kLeaveAction, below, Expr{}, count_up},
        Command{kLeaveCompAction, below, Expr{}, count_up},
        Command{kJoinAction, below, Expr{}, {}},
        Command{kResetAction, counter == threshold, r_reset, clear},
    };
  } else {
    m.commands = {
        Command{kLeaveAction, below, Expr{}, {}},
        Command{kLeaveCompAction, below, Expr{}, {}},
        Command{kJoinAction, below, Expr{}, count_up},
        Command{kResetAction, counter == threshold, r_reset, clear},
    };
  }
  return m;
}

std::vector<RewardDef> reward_structs() {
  const Expr comp = Expr::var(kCompVar);
  return {
      RewardDef{kAllResetsReward, kResetAction, Expr::boolean(true), 1.0},
      RewardDef{kUsefulResetsReward, kResetAction, comp, 1.0},
      RewardDef{kUselessResetsReward, kResetAction, !comp, 1.0},
  };
}

Ctmc assemble(const ScenarioParams& p, const StrategyConfig& s,
              const ExploreOptions& base_options) {
  ExploreOptions options = base_options;
  const Expr comp = Expr::var(kCompVar);
  options.labels.push_back(LabelDef{kCompromisedLabel, comp});
  options.labels.push_back(LabelDef{kUncompromisedLabel, !comp});
  for (auto& r : reward_structs()) options.rewards.push_back(std::move(r));
  return explore(compose({network_module(p), env_module(s)}), options);
}

GridEntry threshold_grid(Scenario sc, Strategy st, Query q) {
  struct Row {
    ThresholdGrid q1, q2, q3, q4;
  };
  struct Block {
    Row time, leave, join;
    int duration;
  };
  // Threshold registry, one block per scenario: the grid used for each
  // question and the observation window in months.
  static const std::array<Block, 6> registry = {{
      // HA
      {{{3, 12, 3}, {1, 12, 1}, {3, 12, 3}, {1, 12, 1}},
       {{5, 20, 5}, {1, 20, 1}, {5, 20, 5}, {1, 20, 1}},
       {{5, 20, 5}, {1, 20, 1}, {5, 20, 5}, {1, 20, 1}},
       60},
      // SE
      {{{12, 48, 12}, {1, 48, 1}, {12, 48, 12}, {1, 48, 1}},
       {{2, 5, 1}, {1, 5, 1}, {2, 5, 1}, {1, 5, 1}},
       {{2, 5, 1}, {1, 5, 1}, {2, 5, 1}, {1, 5, 1}},
       120},
      // CBA
      {{{6, 24, 6}, {1, 24, 1}, {6, 24, 6}, {1, 24, 1}},
       {{10, 40, 10}, {1, 40, 1}, {10, 40, 10}, {1, 40, 1}},
       {{10, 40, 10}, {1, 40, 1}, {10, 40, 10}, {1, 40, 1}},
       120},
      // PHHC
      {{{1, 4, 1}, {1, 4, 1}, {1, 4, 1}, {1, 4, 1}},
       {{5, 20, 5}, {5, 20, 5}, {5, 20, 5}, {5, 20, 5}},
       {{5, 20, 5}, {5, 20, 5}, {5, 20, 5}, {5, 20, 5}},
       24},
      // TA
      {{{1, 4, 1}, {1, 4, 1}, {1, 4, 1}, {1, 4, 1}},
       {{5, 20, 5}, {1, 20, 1}, {5, 20, 5}, {1, 20, 1}},
       {{5, 20, 5}, {1, 20, 1}, {5, 20, 5}, {1, 20, 1}},
       60},
      // WSA
      {{{1, 4, 1}, {1, 4, 1}, {1, 4, 1}, {1, 4, 1}},
       {{5, 20, 5}, {5, 20, 5}, {5, 20, 5}, {5, 20, 5}},
       {{5, 20, 5}, {5, 20, 5}, {5, 20, 5}, {5, 20, 5}},
       24},
  }};

  const Block& block = registry[static_cast<std::size_t>(sc)];
  const Row& row = st == Strategy::kTime    ? block.time
                   : st == Strategy::kLeave ? block.leave
                                            : block.join;
  const ThresholdGrid& grid = q == Query::kQ1   ? row.q1
                              : q == Query::kQ2 ? row.q2
                              : q == Query::kQ3 ? row.q3
                                                : row.q4;
  return GridEntry{grid, block.duration};
}

}  // namespace rekey
