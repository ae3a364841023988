#include "rekey/sweep.hpp"

#include <cstdio>
#include <future>
#include <ostream>

#include "rekey/errors.hpp"

namespace rekey {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::vector<SweepRow> rows_for_threshold(const SweepPlan& plan, int threshold) {
  const std::string scenario = to_string(plan.scenario);
  const std::string strategy = to_string(plan.strategy);
  const std::string question = to_string(plan.question);

  const Ctmc ctmc = assemble(
      plan.params, StrategyConfig{plan.strategy, threshold, plan.r_reset});

  std::vector<SweepRow> rows;
  switch (plan.question) {
    case Query::kQ1: {
      const auto curve =
          q1_curve(ctmc, plan.duration_months, plan.month_step, plan.solver);
      for (std::size_t i = 0; i < curve.size(); ++i) {
        rows.push_back(SweepRow{scenario, strategy, threshold, question,
                                static_cast<int>(i + 1) * plan.month_step,
                                curve[i], std::nullopt, std::nullopt});
      }
      break;
    }
    case Query::kQ2:
      rows.push_back(SweepRow{scenario, strategy, threshold, question,
                              std::nullopt, q2_longrun(ctmc, plan.solver),
                              std::nullopt, std::nullopt});
      break;
    case Query::kQ3: {
      const auto curve =
          q3_curve(ctmc, plan.duration_months, plan.month_step, plan.solver);
      for (std::size_t i = 0; i < curve.size(); ++i) {
        rows.push_back(SweepRow{scenario, strategy, threshold, question,
                                static_cast<int>(i + 1) * plan.month_step,
                                curve[i], std::nullopt, std::nullopt});
      }
      break;
    }
    case Query::kQ4: {
      const Efficiency eff = q4_efficiency(ctmc, plan.solver);
      rows.push_back(SweepRow{scenario, strategy, threshold, question,
                              std::nullopt, eff.useful_pct, eff.useless_pct,
                              std::nullopt});
      break;
    }
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepPlan& plan) {
  if ((plan.question == Query::kQ1 || plan.question == Query::kQ3) &&
      plan.duration_months < 1) {
    throw Error("sweep needs duration_months >= 1 for q1/q3");
  }
  const std::vector<int> thresholds = plan.grid.values();

  // Grid points evaluate concurrently; rows are still emitted in plan order.
  std::vector<std::future<std::vector<SweepRow>>> futures;
  futures.reserve(thresholds.size());
  for (int threshold : thresholds) {
    futures.push_back(std::async(std::launch::async, rows_for_threshold,
                                 std::cref(plan), threshold));
  }

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    try {
      auto part = futures[i].get();
      rows.insert(rows.end(), part.begin(), part.end());
    } catch (const Error& e) {
      // Solver errors abort the sweep; a marker row flags the partial output.
      for (std::size_t j = i + 1; j < futures.size(); ++j) futures[j].wait();
      rows.push_back(SweepRow{to_string(plan.scenario),
                              to_string(plan.strategy), thresholds[i],
                              to_string(plan.question), std::nullopt,
                              std::nullopt, std::nullopt,
                              std::string("partial: ") + e.what()});
      return rows;
    }
  }
  return rows;
}

void write_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "scenario,strategy,threshold,question,t_months,value,value2\n";
  for (const auto& row : rows) {
    out << row.scenario << ',' << row.strategy << ',' << row.threshold << ','
        << row.question << ',';
    if (row.t_months) out << *row.t_months;
    out << ',';
    if (row.note) {
      // partial-output marker: the note replaces the value column
      std::string note = *row.note;
      for (char& c : note) {
        if (c == ',' || c == '\n') c = ';';
      }
      out << note;
    } else if (row.value) {
      out << format_value(*row.value);
    }
    out << ',';
    if (row.value2) out << format_value(*row.value2);
    out << '\n';
  }
}

}  // namespace rekey
