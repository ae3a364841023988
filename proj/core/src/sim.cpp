#include "rekey/sim.hpp"

#include <cmath>
#include <random>
#include <thread>

#include "rekey/errors.hpp"

namespace rekey {

namespace {

constexpr const char* kRngName = "mt19937_64/splitmix64-streams";

// SplitMix64 output mix; path k draws its generator seed from the stream
// position seed + (k+1) * golden gamma, so any partition of paths across
// workers sees the same per-path randomness.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path_index) {
  return mix64(seed + (path_index + 1) * 0x9E3779B97F4A7C15ull);
}

double uniform_open(std::mt19937_64& rng) {
  // (0,1), never exactly 0 or 1, independent of library distributions
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Streaming CTMC walk over the explored chain.
class PathWalker {
 public:
  PathWalker(const Ctmc& ctmc, std::uint64_t seed)
      : ctmc_(ctmc), exits_(ctmc.exit_rates()), rng_(seed) {}

  double time() const { return time_; }
  StateIndex state() const { return state_; }

  /// Advances one event. Returns false from an absorbing state.
  bool step(int* action = nullptr) {
    const double exit = exits_[state_];
    if (exit <= 0.0) return false;
    time_ += -std::log(uniform_open(rng_)) / exit;
    double pick = uniform_open(rng_) * exit;
    const std::size_t begin = ctmc_.row_offsets[state_];
    const std::size_t end = ctmc_.row_offsets[state_ + 1];
    std::size_t chosen = end - 1;
    for (std::size_t k = begin; k < end; ++k) {
      pick -= ctmc_.transitions[k].rate;
      if (pick <= 0.0) {
        chosen = k;
        break;
      }
    }
    state_ = ctmc_.transitions[chosen].dst;
    if (action) *action = ctmc_.transitions[chosen].action;
    return true;
  }

  void reset_to(StateIndex s) {
    state_ = s;
    time_ = 0.0;
  }

 private:
  const Ctmc& ctmc_;
  std::vector<double> exits_;
  std::mt19937_64 rng_;
  StateIndex state_ = 0;
  double time_ = 0.0;
};

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs one boolean experiment per path and returns the success count.
// Aggregation is integral, so the result is independent of the worker split.
template <typename PerPath>
std::int64_t count_successes(std::int64_t n_paths, int workers,
                             const PerPath& per_path) {
  const int w = resolve_workers(workers);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(w), 0);
  std::vector<std::thread> threads;
  const std::int64_t chunk = (n_paths + w - 1) / w;
  for (int i = 0; i < w; ++i) {
    const std::int64_t begin = i * chunk;
    const std::int64_t end = std::min(n_paths, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, i, begin, end] {
      std::int64_t local = 0;
      for (std::int64_t k = begin; k < end; ++k) {
        if (per_path(static_cast<std::uint64_t>(k))) ++local;
      }
      counts[static_cast<std::size_t>(i)] = local;
    });
  }
  for (auto& t : threads) t.join();
  std::int64_t total = 0;
  for (std::int64_t c : counts) total += c;
  return total;
}

SimEstimate binomial_estimate(std::int64_t successes, std::int64_t n,
                              std::uint64_t seed) {
  SimEstimate est;
  est.mean = static_cast<double>(successes) / static_cast<double>(n);
  est.ci95_halfwidth =
      1.96 * std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(n));
  est.n_paths = n;
  est.seed = seed;
  est.rng_name = kRngName;
  return est;
}

void require_paths(const SimOptions& opt) {
  if (opt.n_paths < 100) {
    throw Error("simulation needs at least 100 paths");
  }
  if (!(opt.longrun_horizon_days > 0.0)) {
    throw Error("long-run horizon must be positive");
  }
}

}  // namespace

Trajectory simulate_path(const Ctmc& ctmc, std::uint64_t seed, double t_max) {
  if (!(t_max > 0.0)) throw Error("simulate_path needs t_max > 0");
  PathWalker walker(ctmc, seed);
  walker.reset_to(ctmc.init);
  Trajectory traj{PathEvent{0.0, ctmc.init, -1}};
  int action = -1;
  while (walker.step(&action)) {
    if (walker.time() > t_max) break;
    traj.push_back(PathEvent{walker.time(), walker.state(), action});
  }
  return traj;
}

SimEstimate estimate_q1(const Ctmc& ctmc, int t_months, const SimOptions& opt) {
  require_paths(opt);
  const auto& comp = ctmc.label(kCompromisedLabel);
  const double horizon = 30.0 * t_months;
  const std::int64_t hits =
      count_successes(opt.n_paths, opt.workers, [&](std::uint64_t k) {
        PathWalker walker(ctmc, path_seed(opt.seed, k));
        walker.reset_to(ctmc.init);
        StateIndex at = ctmc.init;
        while (walker.step()) {
          if (walker.time() > horizon) break;
          at = walker.state();
        }
        return comp[at] != 0;
      });
  return binomial_estimate(hits, opt.n_paths, opt.seed);
}

SimEstimate estimate_q2(const Ctmc& ctmc, const SimOptions& opt) {
  require_paths(opt);
  const auto& comp = ctmc.label(kCompromisedLabel);
  const double horizon = opt.longrun_horizon_days;
  const double burnin = opt.burnin_fraction * horizon;
  const int batches = std::max(1, opt.batches);
  const double batch_len = (horizon - burnin) / batches;

  // One long path; the time average of the compromised indicator is
  // accumulated per batch so the CI can come from between-batch variance.
  std::vector<double> batch_time(static_cast<std::size_t>(batches), 0.0);
  PathWalker walker(ctmc, path_seed(opt.seed, 0));
  walker.reset_to(ctmc.init);
  double prev_time = 0.0;
  StateIndex prev_state = ctmc.init;
  bool more = true;
  while (more && prev_time < horizon) {
    more = walker.step();
    const double now = more ? std::min(walker.time(), horizon) : horizon;
    if (comp[prev_state]) {
      // spread the holding interval over the batches it overlaps
      double a = std::max(prev_time, burnin);
      const double b = std::max(now, burnin);
      while (a < b) {
        const int idx = std::min(
            batches - 1, static_cast<int>((a - burnin) / batch_len));
        const double batch_end = burnin + (idx + 1) * batch_len;
        const double piece = std::min(b, batch_end) - a;
        batch_time[static_cast<std::size_t>(idx)] += piece;
        a += piece;
      }
    }
    prev_time = more ? walker.time() : horizon;
    prev_state = walker.state();
  }

  double mean = 0.0;
  for (double t : batch_time) mean += t;
  mean /= (horizon - burnin);

  double var = 0.0;
  for (double t : batch_time) {
    const double m = t / batch_len;
    var += (m - mean) * (m - mean);
  }
  var = batches > 1 ? var / (batches - 1) : 0.0;

  SimEstimate est;
  est.mean = mean;
  est.ci95_halfwidth = 1.96 * std::sqrt(var / batches);
  est.n_paths = 1;
  est.seed = opt.seed;
  est.rng_name = kRngName;
  return est;
}

SimEstimate estimate_q3(const Ctmc& ctmc, int t_months, const SimOptions& opt,
                        const SolverSettings& settings) {
  require_paths(opt);
  const auto& comp = ctmc.label(kCompromisedLabel);
  // Episodes start from the state the numerical engine identifies as the
  // recovery-risk maximizer at this tail (the {max} filter's argmax).
  const StateIndex start =
      q3_recovery_detail(ctmc, t_months, settings).argmax_state;
  const double horizon = 30.0 * t_months;

  const std::int64_t episodes = opt.n_paths;
  const std::int64_t lasting =
      count_successes(episodes, opt.workers, [&](std::uint64_t k) {
        PathWalker walker(ctmc, path_seed(opt.seed, k));
        walker.reset_to(start);
        // episode = maximal interval with the key compromised
        while (comp[walker.state()]) {
          if (walker.time() >= horizon) return true;
          if (!walker.step()) return true;  // stuck compromised
        }
        return walker.time() >= horizon;
      });
  if (episodes == 0) throw QueryError("no compromise episodes sampled");
  return binomial_estimate(lasting, episodes, opt.seed);
}

SimEstimate estimate_q4_useful(const Ctmc& ctmc, const SimOptions& opt) {
  require_paths(opt);
  const auto& comp = ctmc.label(kCompromisedLabel);
  const int reset_action = ctmc.action_id(kResetAction);
  if (reset_action < 0) throw QueryError("model has no reset action");

  PathWalker walker(ctmc, path_seed(opt.seed, 0));
  walker.reset_to(ctmc.init);
  std::int64_t resets = 0;
  std::int64_t useful = 0;
  int action = -1;
  StateIndex prev = walker.state();
  while (walker.time() < opt.longrun_horizon_days && walker.step(&action)) {
    if (action == reset_action) {
      ++resets;
      if (comp[prev]) ++useful;
    }
    prev = walker.state();
  }
  if (resets == 0) throw QueryError("no resets in steady state");
  SimEstimate est = binomial_estimate(useful, resets, opt.seed);
  est.n_paths = 1;  // one long path; the CI is over its reset events
  return est;
}

SimEstimate estimate(Query query, const Ctmc& ctmc, int t_months,
                     const SimOptions& opt, const SolverSettings& settings) {
  switch (query) {
    case Query::kQ1:
      return estimate_q1(ctmc, t_months, opt);
    case Query::kQ2:
      return estimate_q2(ctmc, opt);
    case Query::kQ3:
      return estimate_q3(ctmc, t_months, opt, settings);
    case Query::kQ4:
      return estimate_q4_useful(ctmc, opt);
  }
  throw Error("unknown query");
}

}  // namespace rekey
