#pragma once

#include <string>
#include <vector>

#include "rekey/ctmc.hpp"

namespace rekey {

/// ZigBee application profiles with predefined network parameters.
enum class Scenario { kHA, kSE, kCBA, kPHHC, kTA, kWSA };

enum class Strategy { kTime, kLeave, kJoin };

enum class Query { kQ1, kQ2, kQ3, kQ4 };

std::string to_string(Scenario s);
std::string to_string(Strategy s);
std::string to_string(Query q);
Scenario scenario_from_string(const std::string& s);
Strategy strategy_from_string(const std::string& s);
Query query_from_string(const std::string& s);

/// Network parameters of an application profile. Rates are per day.
struct ScenarioParams {
  int max = 0;           // maximal network size (devices)
  double r_join = 0.0;   // join rate per free slot
  double r_leave = 0.0;  // leave rate per device
  double p_comp = 0.0;   // probability a departure compromises the key
};

/// Key-update strategy: the trust center resets the network key periodically
/// (time), after a number of departures (leave) or after a number of joins
/// (join). `r_reset` is the rate of the reset action once it is enabled.
struct StrategyConfig {
  Strategy kind = Strategy::kTime;
  int threshold = 1;  // months for time-based, devices otherwise
  double r_reset = 1.0 / 24.0;
};

/// Inclusive threshold range.
struct ThresholdGrid {
  int start = 1;
  int end = 1;
  int step = 1;

  std::vector<int> values() const;
};

/// Predefined parameters for the six application profiles.
ScenarioParams scenario_params(Scenario s);

/// The network module: devices leave (possibly compromising the key), free
/// slots are refilled, and a reset clears the compromised flag.
ModuleSpec network_module(const ScenarioParams& p);

/// The environment module driving the reset action for a strategy. Counter
/// strategies block the network actions while a reset is pending.
ModuleSpec env_module(const StrategyConfig& s);

/// Transition rewards counting all / useful / useless resets. A reset is
/// useful when it fires from a compromised state.
std::vector<RewardDef> reward_structs();

inline constexpr const char* kCompromisedLabel = "compromised";
inline constexpr const char* kUncompromisedLabel = "uncompromised";
inline constexpr const char* kResetAction = "reset";
inline constexpr const char* kAllResetsReward = "all_resets";
inline constexpr const char* kUsefulResetsReward = "useful_resets";
inline constexpr const char* kUselessResetsReward = "useless_resets";

/// Composes network and environment, explores the chain and attaches the
/// compromised/uncompromised labels and the three reset reward structures.
Ctmc assemble(const ScenarioParams& p, const StrategyConfig& s,
              const ExploreOptions& base_options = {});

/// Registry entry: the threshold range used for a (scenario, strategy,
/// question) experiment and the scenario's observation window in months.
struct GridEntry {
  ThresholdGrid grid;
  int duration_months = 0;
};

/// Threshold registry for the predefined experiment sweeps.
GridEntry threshold_grid(Scenario sc, Strategy st, Query q);

}  // namespace rekey
