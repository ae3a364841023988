#include "table_oracle.hpp"

namespace oracle {

namespace {

struct Step {
  std::string action;
  double rate;
  State next;
};

std::vector<Step> successors(const Params& p, const State& s) {
  std::vector<Step> out;
  const bool counting = p.kind != Kind::kTime;
  const bool blocked = counting && s.counter == p.threshold;

  if (s.size > 0 && !blocked) {
    const int bump = p.kind == Kind::kLeave ? s.counter + 1 : s.counter;
    out.push_back({"leave", p.r_leave * (1.0 - p.p_comp) * s.size,
                   State{s.size - 1, s.comp, bump}});
    out.push_back({"leave_compromise", p.r_leave * p.p_comp * s.size,
                   State{s.size - 1, true, bump}});
  }
  if (s.size < p.max && !blocked) {
    const int bump = p.kind == Kind::kJoin ? s.counter + 1 : s.counter;
    out.push_back({"join", p.r_join * (p.max - s.size),
                   State{s.size + 1, s.comp, bump}});
  }
  if (p.kind == Kind::kTime) {
    out.push_back({"reset", 1.0 / (30.0 * p.threshold),
                   State{s.size, false, 0}});
  } else if (s.counter == p.threshold) {
    out.push_back({"reset", p.r_reset, State{s.size, false, 0}});
  }

  std::erase_if(out, [](const Step& step) { return step.rate <= 0.0; });
  return out;
}

}  // namespace

Model enumerate(const Params& params) {
  Model model;
  const State init{params.max, false, 0};
  model.index.emplace(init, 0);
  model.states.push_back(init);

  for (std::size_t i = 0; i < model.states.size(); ++i) {
    const State current = model.states[i];
    for (const Step& step : successors(params, current)) {
      auto [it, inserted] = model.index.emplace(
          step.next, static_cast<int>(model.states.size()));
      if (inserted) model.states.push_back(step.next);
      model.edges.push_back(
          {static_cast<int>(i), it->second, step.rate, step.action});
    }
  }
  return model;
}

}  // namespace oracle
