#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rekey/queries.hpp"

namespace rekey {

/// One experiment family: a threshold grid for a scenario/strategy pair and a
/// question, with a month range for the transient questions.
struct SweepPlan {
  Scenario scenario = Scenario::kHA;
  ScenarioParams params;        // resolved parameters (overrides applied)
  Strategy strategy = Strategy::kTime;
  double r_reset = 1.0 / 24.0;
  ThresholdGrid grid;
  Query question = Query::kQ1;
  int duration_months = 1;      // used by Q1/Q3
  int month_step = 1;
  SolverSettings solver;
};

struct SweepRow {
  std::string scenario;
  std::string strategy;
  int threshold = 0;
  std::string question;
  std::optional<int> t_months;
  std::optional<double> value;
  std::optional<double> value2;
  std::optional<std::string> note;  // set on the partial-output marker row
};

/// Runs the plan, one grid point at a time (grid points may evaluate
/// concurrently; rows always come back in plan order). A solver error aborts
/// the sweep: rows computed so far are returned, followed by a marker row
/// whose note carries the error text.
std::vector<SweepRow> run_sweep(const SweepPlan& plan);

/// Formats a value with 12 significant digits and '.' decimal separator.
std::string format_value(double v);

/// CSV with header scenario,strategy,threshold,question,t_months,value,value2.
/// t_months stays empty for Q2/Q4 rows, value2 is only set for Q4.
void write_csv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace rekey
