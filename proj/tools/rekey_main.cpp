// Command-line front end: single checks, experiment sweeps to CSV, the
// policy advisor, the Monte Carlo cross-check and the network-size search.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rekey/advisor.hpp"
#include "rekey/errors.hpp"
#include "rekey/sim.hpp"
#include "rekey/sweep.hpp"

namespace {

using nlohmann::json;

struct Options {
  std::string scenario = "ha";
  std::string strategy = "time";
  std::optional<int> threshold;
  std::string question = "q1";
  std::optional<int> months;
  std::optional<std::string> grid;
  std::optional<std::string> out;
  std::uint64_t seed = 1;
  std::int64_t paths = 100000;
  std::optional<double> epsilon_transient;
  std::optional<double> epsilon_ss;
  std::optional<int> max_iter;
  std::optional<std::string> method;
  std::vector<std::string> overrides;
  std::vector<std::string> require_flags;
  std::vector<std::string> candidate_flags;
  std::optional<std::string> config_file;
  double bound = 0.999;  // max-size confidentiality target (P(!comp))
  int cap = 1024;
  int month_step = 1;
  std::optional<double> horizon_days;
};

rekey::ThresholdGrid parse_grid(const std::string& text) {
  rekey::ThresholdGrid grid;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> grid.start >> c1 >> grid.end >> c2 >> grid.step) || c1 != ':' ||
      c2 != ':') {
    throw rekey::Error("grid must be start:end:step, got '" + text + "'");
  }
  return grid;
}

void apply_override(const std::string& kv, rekey::ScenarioParams& params,
                    rekey::StrategyConfig& strategy) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) {
    throw rekey::Error("override must be key=value, got '" + kv + "'");
  }
  const std::string key = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);
  if (key == "max") {
    params.max = std::stoi(value);
  } else if (key == "r_join") {
    params.r_join = std::stod(value);
  } else if (key == "r_leave") {
    params.r_leave = std::stod(value);
  } else if (key == "p_comp") {
    params.p_comp = std::stod(value);
  } else if (key == "kind") {
    strategy.kind = rekey::strategy_from_string(value);
  } else if (key == "threshold") {
    strategy.threshold = std::stoi(value);
  } else if (key == "r_reset") {
    strategy.r_reset = std::stod(value);
  } else {
    throw rekey::Error("unknown override key '" + key + "'");
  }
}

rekey::Requirement parse_requirement(const json& j) {
  rekey::Requirement req;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "confidentiality_at_all_times" || kind == "confidentiality") {
    req.kind = rekey::Requirement::Kind::kConfidentialityAtAllTimes;
  } else if (kind == "steady_state" || kind == "steady") {
    req.kind = rekey::Requirement::Kind::kSteadyState;
  } else if (kind == "recovery") {
    req.kind = rekey::Requirement::Kind::kRecovery;
    req.tail_months = j.at("tail_months").get<int>();
  } else if (kind == "efficiency_useless" || kind == "efficiency") {
    req.kind = rekey::Requirement::Kind::kEfficiencyUseless;
  } else {
    throw rekey::Error("unknown requirement kind '" + kind + "'");
  }
  req.bound = j.at("bound").get<double>();
  return req;
}

rekey::Requirement parse_requirement_flag(const std::string& text) {
  // kind:bound or recovery:tail_months:bound
  std::vector<std::string> parts;
  std::string piece;
  std::istringstream in(text);
  while (std::getline(in, piece, ':')) parts.push_back(piece);
  if (parts.size() < 2) {
    throw rekey::Error("requirement flag must be kind:bound, got '" + text +
                       "'");
  }
  json j;
  j["kind"] = parts[0];
  if (parts[0] == "recovery") {
    if (parts.size() != 3) {
      throw rekey::Error("recovery requirement needs tail:bound");
    }
    j["tail_months"] = std::stoi(parts[1]);
    j["bound"] = std::stod(parts[2]);
  } else {
    j["bound"] = std::stod(parts[1]);
  }
  return parse_requirement(j);
}

struct Resolved {
  rekey::Scenario scenario = rekey::Scenario::kHA;
  rekey::ScenarioParams params;
  rekey::StrategyConfig strategy;
  rekey::SolverSettings solver;
  std::vector<rekey::Requirement> requirements;
};

// Precedence: built-in scenario constants < config file < command line.
Resolved resolve(const Options& opt, const CLI::App* cmd) {
  json config;
  if (opt.config_file) {
    std::ifstream in(*opt.config_file);
    if (!in) throw rekey::Error("cannot open config '" + *opt.config_file + "'");
    in >> config;
  }

  Resolved r;
  std::string scenario_name = opt.scenario;
  const bool scenario_from_cli = cmd->count("--scenario") > 0;
  if (!scenario_from_cli && config.contains("scenario") &&
      config["scenario"].contains("name")) {
    scenario_name = config["scenario"]["name"].get<std::string>();
  }
  r.scenario = rekey::scenario_from_string(scenario_name);
  r.params = rekey::scenario_params(r.scenario);

  if (config.contains("scenario")) {
    const auto& s = config["scenario"];
    if (s.contains("max")) r.params.max = s["max"].get<int>();
    if (s.contains("r_join")) r.params.r_join = s["r_join"].get<double>();
    if (s.contains("r_leave")) r.params.r_leave = s["r_leave"].get<double>();
    if (s.contains("p_comp")) r.params.p_comp = s["p_comp"].get<double>();
  }
  if (config.contains("strategy")) {
    const auto& s = config["strategy"];
    if (s.contains("kind")) {
      r.strategy.kind = rekey::strategy_from_string(s["kind"].get<std::string>());
    }
    if (s.contains("threshold")) r.strategy.threshold = s["threshold"].get<int>();
    if (s.contains("r_reset")) r.strategy.r_reset = s["r_reset"].get<double>();
  }
  if (config.contains("solver")) {
    const auto& s = config["solver"];
    if (s.contains("epsilon_transient")) {
      r.solver.epsilon_transient = s["epsilon_transient"].get<double>();
    }
    if (s.contains("epsilon_ss")) r.solver.epsilon_ss = s["epsilon_ss"].get<double>();
    if (s.contains("max_iter")) r.solver.max_iter = s["max_iter"].get<int>();
    if (s.contains("method")) {
      const std::string m = s["method"].get<std::string>();
      r.solver.method = m == "gauss-seidel"
                            ? rekey::SolverSettings::Method::kGaussSeidel
                            : rekey::SolverSettings::Method::kPower;
    }
  }
  if (config.contains("requirements")) {
    for (const auto& j : config["requirements"]) {
      r.requirements.push_back(parse_requirement(j));
    }
  }

  if (cmd->count("--strategy")) {
    r.strategy.kind = rekey::strategy_from_string(opt.strategy);
  }
  if (opt.threshold) r.strategy.threshold = *opt.threshold;
  if (opt.epsilon_transient) r.solver.epsilon_transient = *opt.epsilon_transient;
  if (opt.epsilon_ss) r.solver.epsilon_ss = *opt.epsilon_ss;
  if (opt.max_iter) r.solver.max_iter = *opt.max_iter;
  if (opt.method) {
    r.solver.method = *opt.method == "gauss-seidel"
                          ? rekey::SolverSettings::Method::kGaussSeidel
                          : rekey::SolverSettings::Method::kPower;
  }
  for (const auto& kv : opt.overrides) {
    apply_override(kv, r.params, r.strategy);
  }
  for (const auto& flag : opt.require_flags) {
    r.requirements.push_back(parse_requirement_flag(flag));
  }
  return r;
}

void write_output(const std::optional<std::string>& path,
                  const std::string& text) {
  if (path) {
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw rekey::Error("cannot write '" + *path + "'");
    out << text;
  } else {
    std::cout << text;
  }
}

int run_check(const Options& opt, const CLI::App* cmd) {
  const Resolved r = resolve(opt, cmd);
  const rekey::Ctmc ctmc = rekey::assemble(r.params, r.strategy);
  const rekey::Query question = rekey::query_from_string(opt.question);
  const rekey::QueryResult result =
      rekey::evaluate_query(question, ctmc, opt.months, r.solver);

  const std::vector<rekey::SweepRow> rows = {
      {rekey::to_string(r.scenario), rekey::to_string(r.strategy.kind),
       r.strategy.threshold, rekey::to_string(question), result.t_months,
       result.value, result.value2, std::nullopt}};
  std::ostringstream text;
  rekey::write_csv(rows, text);
  write_output(opt.out, text.str());
  return 0;
}

int run_sweep_cmd(const Options& opt, const CLI::App* cmd) {
  const Resolved r = resolve(opt, cmd);
  const rekey::Query question = rekey::query_from_string(opt.question);

  rekey::SweepPlan plan;
  plan.scenario = r.scenario;
  plan.params = r.params;
  plan.strategy = r.strategy.kind;
  plan.r_reset = r.strategy.r_reset;
  plan.question = question;
  plan.solver = r.solver;
  plan.month_step = opt.month_step;

  const rekey::GridEntry entry =
      rekey::threshold_grid(r.scenario, r.strategy.kind, question);
  plan.grid = opt.grid ? parse_grid(*opt.grid) : entry.grid;
  plan.duration_months = opt.months ? *opt.months : entry.duration_months;

  const auto rows = rekey::run_sweep(plan);
  std::ostringstream text;
  rekey::write_csv(rows, text);
  write_output(opt.out, text.str());
  return 0;
}

json advice_to_json(const rekey::Advice& advice,
                    const std::vector<rekey::Requirement>& requirements) {
  json j;
  for (const auto& [strategy, set] : advice.satisfying) {
    j["satisfying"][rekey::to_string(strategy)] = set;
  }
  if (advice.has_solution) {
    j["chosen"] = {{"strategy", rekey::to_string(advice.chosen_strategy)},
                   {"threshold", advice.chosen_threshold},
                   {"resets_per_year", advice.chosen_resets_per_year}};
  } else {
    j["chosen"] = nullptr;
  }
  j["evidence"] = json::array();
  for (const auto& row : advice.evidence) {
    json e = {{"strategy", rekey::to_string(row.strategy)},
              {"threshold", row.threshold},
              {"requirement", row.requirement},
              {"query", rekey::to_string(row.query)},
              {"value", row.value},
              {"pass", row.pass}};
    if (row.t_months) e["t_months"] = *row.t_months;
    j["evidence"].push_back(std::move(e));
  }
  j["requirements"] = json::array();
  for (const auto& req : requirements) {
    json e;
    switch (req.kind) {
      case rekey::Requirement::Kind::kConfidentialityAtAllTimes:
        e["kind"] = "confidentiality_at_all_times";
        break;
      case rekey::Requirement::Kind::kSteadyState:
        e["kind"] = "steady_state";
        break;
      case rekey::Requirement::Kind::kRecovery:
        e["kind"] = "recovery";
        e["tail_months"] = req.tail_months;
        break;
      case rekey::Requirement::Kind::kEfficiencyUseless:
        e["kind"] = "efficiency_useless";
        break;
    }
    e["bound"] = req.bound;
    j["requirements"].push_back(std::move(e));
  }
  return j;
}

int run_advise(const Options& opt, const CLI::App* cmd) {
  const Resolved r = resolve(opt, cmd);
  if (r.requirements.empty()) {
    throw rekey::Error(
        "advise needs at least one requirement (config requirements[] or "
        "--require)");
  }

  std::vector<rekey::Candidate> candidates;
  if (!opt.candidate_flags.empty()) {
    for (const auto& flag : opt.candidate_flags) {
      // kind or kind:start:end:step
      const auto colon = flag.find(':');
      rekey::Candidate c;
      c.r_reset = r.strategy.r_reset;
      if (colon == std::string::npos) {
        c.strategy = rekey::strategy_from_string(flag);
        c.thresholds =
            rekey::threshold_grid(r.scenario, c.strategy, rekey::Query::kQ1)
                .grid.values();
      } else {
        c.strategy = rekey::strategy_from_string(flag.substr(0, colon));
        c.thresholds = parse_grid(flag.substr(colon + 1)).values();
      }
      candidates.push_back(std::move(c));
    }
  } else {
    // default: every strategy with its predefined per-scenario grid
    for (rekey::Strategy strategy :
         {rekey::Strategy::kTime, rekey::Strategy::kLeave,
          rekey::Strategy::kJoin}) {
      rekey::Candidate c;
      c.strategy = strategy;
      c.r_reset = r.strategy.r_reset;
      c.thresholds =
          rekey::threshold_grid(r.scenario, strategy, rekey::Query::kQ1)
              .grid.values();
      candidates.push_back(std::move(c));
    }
  }

  const int horizon =
      opt.months
          ? *opt.months
          : rekey::threshold_grid(r.scenario, rekey::Strategy::kTime,
                                  rekey::Query::kQ1)
                .duration_months;
  const rekey::Advice advice =
      rekey::advise(r.params, candidates, r.requirements, horizon, r.solver);
  write_output(opt.out, advice_to_json(advice, r.requirements).dump(2) + "\n");
  return advice.has_solution ? 0 : 2;
}

int run_simulate(const Options& opt, const CLI::App* cmd) {
  const Resolved r = resolve(opt, cmd);
  const rekey::Ctmc ctmc = rekey::assemble(r.params, r.strategy);
  const rekey::Query question = rekey::query_from_string(opt.question);
  if ((question == rekey::Query::kQ1 || question == rekey::Query::kQ3) &&
      !opt.months) {
    throw rekey::Error("q1/q3 simulation needs --months");
  }

  rekey::SimOptions sim;
  sim.n_paths = opt.paths;
  sim.seed = opt.seed;
  if (opt.horizon_days) sim.longrun_horizon_days = *opt.horizon_days;

  const rekey::SimEstimate est = rekey::estimate(
      question, ctmc, opt.months.value_or(0), sim, r.solver);

  json j = {{"scenario", rekey::to_string(r.scenario)},
            {"strategy", rekey::to_string(r.strategy.kind)},
            {"threshold", r.strategy.threshold},
            {"question", rekey::to_string(question)},
            {"mean", est.mean},
            {"ci95_halfwidth", est.ci95_halfwidth},
            {"n_paths", est.n_paths},
            {"seed", est.seed},
            {"rng", est.rng_name}};
  if (opt.months) j["t_months"] = *opt.months;
  if (question == rekey::Query::kQ4) {
    j["useful_pct"] = 100.0 * est.mean;
    j["useless_pct"] = 100.0 * (1.0 - est.mean);
  }
  write_output(opt.out, j.dump(2) + "\n");
  return 0;
}

int run_max_size(const Options& opt, const CLI::App* cmd) {
  const Resolved r = resolve(opt, cmd);
  const int horizon =
      opt.months
          ? *opt.months
          : rekey::threshold_grid(r.scenario, rekey::Strategy::kTime,
                                  rekey::Query::kQ1)
                .duration_months;
  // --bound is the required confidentiality level, i.e. P(compromised) must
  // stay strictly below 1 - bound at all times.
  const double comp_bound = 1.0 - opt.bound;
  const int result = rekey::max_network_size(r.params, r.strategy, comp_bound,
                                             horizon, opt.cap, r.solver);
  json j = {{"scenario", rekey::to_string(r.scenario)},
            {"strategy", rekey::to_string(r.strategy.kind)},
            {"threshold", r.strategy.threshold},
            {"confidentiality", opt.bound},
            {"horizon_months", horizon},
            {"cap", opt.cap},
            {"max_size", result}};
  write_output(opt.out, j.dump(2) + "\n");
  return 0;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--scenario", opt.scenario,
                  "Application profile: ha|se|cba|phhc|ta|wsa");
  cmd->add_option("--strategy", opt.strategy,
                  "Key update strategy: time|leave|join");
  cmd->add_option("--threshold", opt.threshold,
                  "Update threshold (months or devices)");
  cmd->add_option("--months", opt.months, "Month horizon / query instant");
  cmd->add_option("--out", opt.out, "Output file (default stdout)");
  cmd->add_option("--epsilon-transient", opt.epsilon_transient,
                  "Transient truncation error bound");
  cmd->add_option("--epsilon-ss", opt.epsilon_ss,
                  "Steady-state convergence threshold");
  cmd->add_option("--max-iter", opt.max_iter, "Power-method iteration cap");
  cmd->add_option("--method", opt.method,
                  "Steady-state method: power|gauss-seidel");
  cmd->add_option("--override", opt.overrides,
                  "Override any scenario/strategy field, key=value")
      ->take_all();
  cmd->add_option("--config", opt.config_file, "JSON config document");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "CTMC analysis of network-key update policies for low-rate wireless "
      "networks"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* check = app.add_subcommand(
      "check", "Evaluate a single query for one configuration");
  add_common(check, opt);
  check->add_option("--question", opt.question, "q1|q2|q3|q4");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run a threshold/month sweep and emit CSV");
  add_common(sweep, opt);
  sweep->add_option("--question", opt.question, "q1|q2|q3|q4");
  sweep->add_option("--grid", opt.grid,
                    "Threshold grid start:end:step (default: registry)");
  sweep->add_option("--month-step", opt.month_step, "Month stride for q1/q3");

  CLI::App* advise = app.add_subcommand(
      "advise", "Select the policy satisfying all requirements");
  add_common(advise, opt);
  advise->add_option("--candidate", opt.candidate_flags,
                     "Candidate strategy, kind[:start:end:step]")
      ->take_all();
  advise->add_option("--require", opt.require_flags,
                     "Requirement, kind:bound or recovery:tail:bound")
      ->take_all();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo estimate of a query (cross-check)");
  add_common(simulate, opt);
  simulate->add_option("--question", opt.question, "q1|q2|q3|q4");
  simulate->add_option("--paths", opt.paths, "Number of simulated paths");
  simulate->add_option("--seed", opt.seed, "RNG seed");
  simulate->add_option("--horizon-days", opt.horizon_days,
                       "Long-run horizon for q2/q4");

  CLI::App* maxsize = app.add_subcommand(
      "max-size", "Largest network size keeping confidentiality");
  add_common(maxsize, opt);
  maxsize->add_option("--bound", opt.bound,
                      "Required confidentiality probability, e.g. 0.999");
  maxsize->add_option("--cap", opt.cap, "Upper bound for the size search");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return run_check(opt, check);
    if (sweep->parsed()) return run_sweep_cmd(opt, sweep);
    if (advise->parsed()) return run_advise(opt, advise);
    if (simulate->parsed()) return run_simulate(opt, simulate);
    if (maxsize->parsed()) return run_max_size(opt, maxsize);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
