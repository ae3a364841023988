#include <doctest.h>

#include <cmath>

#include "rekey/errors.hpp"
#include "rekey/solver.hpp"
#include "rekey/zigbee.hpp"

using namespace rekey;

TEST_CASE("scenario constants") {
  const ScenarioParams ha = scenario_params(Scenario::kHA);
  CHECK(ha.max == 20);
  CHECK(ha.r_join == doctest::Approx(1.0 / 7.0));
  CHECK(ha.r_leave == doctest::Approx(1.0 / 365.0));
  CHECK(ha.p_comp == doctest::Approx(0.01));

  const ScenarioParams se = scenario_params(Scenario::kSE);
  CHECK(se.max == 5);
  CHECK(se.r_leave == doctest::Approx(1.0 / 1825.0));
  CHECK(se.p_comp == doctest::Approx(1e-5));

  const ScenarioParams cba = scenario_params(Scenario::kCBA);
  CHECK(cba.max == 100);
  CHECK(cba.p_comp == doctest::Approx(1e-3));

  const ScenarioParams phhc = scenario_params(Scenario::kPHHC);
  CHECK(phhc.max == 500);
  CHECK(phhc.r_join == doctest::Approx(1.0 / 7.0));
  CHECK(phhc.r_leave == doctest::Approx(1.0 / 30.0));
  CHECK(phhc.p_comp == doctest::Approx(1e-4));

  const ScenarioParams ta = scenario_params(Scenario::kTA);
  CHECK(ta.max == 20);
  CHECK(ta.r_leave == doctest::Approx(1.0 / 30.0));
  CHECK(ta.p_comp == doctest::Approx(1e-5));

  const ScenarioParams wsa = scenario_params(Scenario::kWSA);
  CHECK(wsa.max == 500);
  CHECK(wsa.r_leave == doctest::Approx(1.0 / 180.0));
  CHECK(wsa.p_comp == doctest::Approx(1e-3));

  // every profile shares the one-join-per-week refill rate
  for (Scenario s : {Scenario::kHA, Scenario::kSE, Scenario::kCBA,
                     Scenario::kPHHC, Scenario::kTA, Scenario::kWSA}) {
    CHECK(scenario_params(s).r_join == doctest::Approx(1.0 / 7.0));
  }

  CHECK_THROWS_AS(scenario_from_string("nope"), Error);
}

TEST_CASE("network module rates at the boundary states") {
  const ScenarioParams ha = scenario_params(Scenario::kHA);
  const Ctmc full = assemble(ha, {Strategy::kTime, 3});

  // init state: size=20, not compromised
  double leave_rate = 0.0, join_rate = 0.0;
  for (std::size_t k = full.row_offsets[full.init];
       k < full.row_offsets[full.init + 1]; ++k) {
    const auto& t = full.transitions[k];
    if (full.actions[t.action] == "leave") leave_rate = t.rate;
    if (full.actions[t.action] == "join") join_rate = t.rate;
  }
  CHECK(leave_rate == doctest::Approx(20.0 * (1.0 / 365.0) * 0.99));
  CHECK(join_rate == 0.0);  // guard size<max blocks the join at full size
}

TEST_CASE("certain compromise removes the plain leave command") {
  ScenarioParams params = scenario_params(Scenario::kHA);
  params.p_comp = 1.0;
  const Ctmc ctmc = assemble(params, {Strategy::kTime, 3});
  for (const auto& t : ctmc.transitions) {
    CHECK(ctmc.actions[t.action] != "leave");  // rate factor (1-p_comp) = 0
  }
}

TEST_CASE("time environment resets at 1/(30*threshold)") {
  const Ctmc ctmc = assemble(scenario_params(Scenario::kHA), {Strategy::kTime, 3});
  int resets = 0;
  for (const auto& t : ctmc.transitions) {
    if (ctmc.actions[t.action] == "reset") {
      ++resets;
      CHECK(t.rate == doctest::Approx(1.0 / 90.0));
    }
  }
  CHECK(resets == static_cast<int>(ctmc.num_states()));
}

TEST_CASE("leave environment with threshold 1 arms on any departure") {
  const ModuleSpec env = env_module({Strategy::kLeave, 1});
  REQUIRE(env.vars.size() == 1);
  CHECK(env.vars[0].lo == 0);
  CHECK(env.vars[0].hi == 1);

  const Ctmc ctmc = assemble(scenario_params(Scenario::kHA), {Strategy::kLeave, 1});
  const int counter_ix = 2;
  for (StateIndex s = 0; s < ctmc.num_states(); ++s) {
    if (ctmc.states[s][counter_ix] != 1) continue;
    for (std::size_t k = ctmc.row_offsets[s]; k < ctmc.row_offsets[s + 1]; ++k) {
      CHECK(ctmc.actions[ctmc.transitions[k].action] == "reset");
      CHECK(ctmc.transitions[k].rate == doctest::Approx(1.0 / 24.0));
    }
  }
}

TEST_CASE("counter environments freeze the network at the threshold") {
  // at counter=threshold only the reset remains enabled, join-based included
  for (Strategy strategy : {Strategy::kLeave, Strategy::kJoin}) {
    const Ctmc ctmc =
        assemble(scenario_params(Scenario::kHA), {strategy, 20});
    const int counter_ix = 2;
    bool saw_threshold_state = false;
    for (StateIndex s = 0; s < ctmc.num_states(); ++s) {
      if (ctmc.states[s][counter_ix] != 20) continue;
      saw_threshold_state = true;
      REQUIRE(ctmc.row_offsets[s + 1] - ctmc.row_offsets[s] == 1);
      CHECK(ctmc.actions[ctmc.transitions[ctmc.row_offsets[s]].action] ==
            "reset");
    }
    CHECK(saw_threshold_state);
  }
}

TEST_CASE("reward structures partition the reset transitions") {
  const Ctmc ctmc = assemble(scenario_params(Scenario::kHA), {Strategy::kTime, 6});
  const auto& all = ctmc.reward(kAllResetsReward);
  const auto& useful = ctmc.reward(kUsefulResetsReward);
  const auto& useless = ctmc.reward(kUselessResetsReward);
  const auto& comp = ctmc.label(kCompromisedLabel);

  int useful_count = 0;
  int comp_states = 0;
  for (std::size_t t = 0; t < ctmc.num_transitions(); ++t) {
    CHECK(useful[t] + useless[t] == all[t]);
    const bool is_reset = ctmc.actions[ctmc.transitions[t].action] == "reset";
    CHECK(all[t] == (is_reset ? 1.0 : 0.0));
    if (useful[t] > 0) ++useful_count;
  }
  for (StateIndex s = 0; s < ctmc.num_states(); ++s) {
    if (comp[s]) ++comp_states;
  }
  // each compromised state has exactly one reset transition carrying reward
  CHECK(useful_count == comp_states);
}

TEST_CASE("zero compromise risk leaves the useful reward empty") {
  ScenarioParams params = scenario_params(Scenario::kHA);
  params.p_comp = 0.0;
  const Ctmc ctmc = assemble(params, {Strategy::kTime, 3});
  double total = 0.0;
  for (double v : ctmc.reward(kUsefulResetsReward)) total += v;
  CHECK(total == 0.0);
}

TEST_CASE("assemble attaches labels and bounds the product state space") {
  const Ctmc se_join = assemble(scenario_params(Scenario::kSE), {Strategy::kJoin, 5});
  CHECK(se_join.num_states() == 69);  // oracle count; product bound is 72
  CHECK(se_join.num_states() <= 2 * 6 * 6);
  CHECK(se_join.labels.count(kCompromisedLabel) == 1);
  CHECK(se_join.labels.count(kUncompromisedLabel) == 1);

  const Ctmc phhc_leave =
      assemble(scenario_params(Scenario::kPHHC), {Strategy::kLeave, 20});
  CHECK(phhc_leave.num_states() <= 2 * 501 * 21);
  CHECK(phhc_leave.num_states() == 20539);  // oracle count
}

TEST_CASE("threshold registry matches the experiment table") {
  const GridEntry ha_q1 = threshold_grid(Scenario::kHA, Strategy::kTime, Query::kQ1);
  CHECK(ha_q1.grid.start == 3);
  CHECK(ha_q1.grid.end == 12);
  CHECK(ha_q1.grid.step == 3);
  CHECK(ha_q1.duration_months == 60);

  const GridEntry se_q2 = threshold_grid(Scenario::kSE, Strategy::kLeave, Query::kQ2);
  CHECK(se_q2.grid.start == 1);
  CHECK(se_q2.grid.end == 5);
  CHECK(se_q2.grid.step == 1);
  CHECK(se_q2.duration_months == 120);

  const GridEntry cba_q4 = threshold_grid(Scenario::kCBA, Strategy::kJoin, Query::kQ4);
  CHECK(cba_q4.grid.start == 1);
  CHECK(cba_q4.grid.end == 40);
  CHECK(cba_q4.grid.step == 1);

  const GridEntry phhc_tb = threshold_grid(Scenario::kPHHC, Strategy::kTime, Query::kQ3);
  CHECK(phhc_tb.grid.start == 1);
  CHECK(phhc_tb.grid.end == 4);
  CHECK(phhc_tb.duration_months == 24);

  CHECK(threshold_grid(Scenario::kTA, Strategy::kTime, Query::kQ1).duration_months == 60);
  CHECK(threshold_grid(Scenario::kWSA, Strategy::kLeave, Query::kQ2).grid.step == 5);

  const auto values = ThresholdGrid{3, 12, 3}.values();
  CHECK(values == std::vector<int>{3, 6, 9, 12});
  CHECK_THROWS_AS((ThresholdGrid{5, 4, 1}.values()), Error);
}

TEST_CASE("smallest-grid models are irreducible") {
  for (Scenario scenario : {Scenario::kHA, Scenario::kSE, Scenario::kCBA,
                            Scenario::kTA}) {
    for (Strategy strategy :
         {Strategy::kTime, Strategy::kLeave, Strategy::kJoin}) {
      const int threshold =
          threshold_grid(scenario, strategy, Query::kQ2).grid.start;
      const Ctmc ctmc =
          assemble(scenario_params(scenario), {strategy, threshold});
      // steady_state performs the structural irreducibility check up front
      CHECK_NOTHROW(steady_state(ctmc));
    }
  }
}

TEST_CASE("strategy validation") {
  CHECK_THROWS_AS(env_module({Strategy::kLeave, 0}), ModelError);
  CHECK_THROWS_AS(env_module({Strategy::kTime, 1, 0.0}), ModelError);
}
