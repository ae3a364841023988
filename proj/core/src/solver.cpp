#include "rekey/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "rekey/errors.hpp"

namespace rekey {

Distribution point_distribution(std::size_t n, StateIndex at) {
  Distribution d(n, 0.0);
  d.at(at) = 1.0;
  return d;
}

void SparseMatrix::mul_left(const std::vector<double>& x,
                            std::vector<double>& y) const {
  for (std::size_t r = 0; r < n; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      y[col[k]] += xr * val[k];
    }
  }
}

void SparseMatrix::mul_right(const std::vector<double>& x,
                             std::vector<double>& y) const {
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      acc += val[k] * x[col[k]];
    }
    y[r] = acc;
  }
}

namespace {

// Accumulates net off-diagonal rates per row (parallel transitions summed,
// self-loops cancel inside the generator) and returns P = I + Q/q.
SparseMatrix build_uniformized_matrix(const Ctmc& ctmc, double q,
                                      const std::vector<std::uint8_t>* active) {
  const std::size_t n = ctmc.num_states();
  SparseMatrix p;
  p.n = n;
  p.row_ptr.resize(n + 1, 0);

  std::vector<std::pair<StateIndex, double>> row;
  for (std::size_t s = 0; s < n; ++s) {
    p.row_ptr[s] = p.col.size();
    const bool absorbing = active && !(*active)[s];
    double off_diagonal = 0.0;
    if (!absorbing) {
      row.clear();
      for (std::size_t k = ctmc.row_offsets[s]; k < ctmc.row_offsets[s + 1];
           ++k) {
        const auto& t = ctmc.transitions[k];
        if (t.dst == t.src) continue;  // self-loops cancel in the generator
        row.emplace_back(t.dst, t.rate / q);
      }
      std::sort(row.begin(), row.end());
      for (std::size_t i = 0; i < row.size();) {
        double v = row[i].second;
        std::size_t j = i + 1;
        while (j < row.size() && row[j].first == row[i].first) {
          v += row[j].second;
          ++j;
        }
        p.col.push_back(row[i].first);
        p.val.push_back(v);
        off_diagonal += v;
        i = j;
      }
    }
    p.col.push_back(static_cast<StateIndex>(s));
    p.val.push_back(1.0 - off_diagonal);
  }
  p.row_ptr[n] = p.col.size();
  return p;
}

}  // namespace

UniformizedChain uniformize(const Ctmc& ctmc, double factor) {
  if (factor < 1.0) throw ModelError("uniformization factor must be >= 1");
  const auto exit = ctmc.exit_rates();
  double max_exit = 0.0;
  for (double e : exit) max_exit = std::max(max_exit, e);

  UniformizedChain chain;
  chain.q = max_exit > 0.0 ? factor * max_exit : 1.0;
  chain.p = build_uniformized_matrix(ctmc, chain.q, nullptr);
  return chain;
}

PoissonWindow poisson_weights(double lambda, double eps) {
  if (lambda < 0.0 || !(eps > 0.0) || eps >= 1.0) {
    throw ModelError("poisson_weights needs lambda >= 0 and eps in (0,1)");
  }

  PoissonWindow window;
  if (lambda == 0.0) {
    window.left = window.right = 0;
    window.weights = {1.0};
    return window;
  }

  // Probabilities are generated from the mode outward with the one-step
  // recurrence, in extended precision: the log form at the mode cancels
  // three O(lambda log lambda) terms, so double alone would leave a uniform
  // relative bias near 1e-11 at the largest lambdas this project meets.
  // Each tail is cut once its geometric remainder bound drops below a small
  // fraction of eps/2, which keeps the retained window generously wider
  // than the minimum.
  const long double tail_budget = 0.5L * eps * 1e-6L;
  const long double lambda_l = lambda;
  const auto mode = static_cast<std::size_t>(lambda);
  const long double log_mode =
      static_cast<long double>(mode) * std::log(lambda_l) - lambda_l -
      std::lgamma(static_cast<long double>(mode) + 1.0L);
  const long double p_mode = std::exp(log_mode);

  std::deque<long double> weights;
  weights.push_back(p_mode);

  std::size_t left = mode;
  long double p = p_mode;
  while (left > 0) {
    // ratio of P(k-1)/P(k) = k / lambda
    const long double ratio = static_cast<long double>(left) / lambda_l;
    p *= ratio;
    // remaining tail below k-1 is bounded by p * ratio' / (1 - ratio') with
    // the next (smaller) ratio; use the current one as a safe overestimate
    if (ratio < 1.0L && p * ratio / (1.0L - ratio) < tail_budget) {
      weights.push_front(p);
      --left;
      break;
    }
    weights.push_front(p);
    --left;
  }

  std::size_t right = mode;
  p = p_mode;
  while (true) {
    const long double ratio = lambda_l / static_cast<long double>(right + 1);
    const long double next = p * ratio;
    if (ratio < 1.0L && next * ratio / (1.0L - ratio) < tail_budget) {
      weights.push_back(next);
      ++right;
      break;
    }
    weights.push_back(next);
    p = next;
    ++right;
  }

  window.left = left;
  window.right = right;
  window.weights.reserve(weights.size());
  for (long double w : weights) {
    window.weights.push_back(static_cast<double>(w));
  }

  // Rounding to double may still push the total a few ulps past 1; the
  // contract is a sum in [1 - eps, 1], so scale down in that case.
  for (int round = 0; round < 4; ++round) {
    double sum = 0.0, carry = 0.0;
    for (double w : window.weights) {
      const double y = w - carry;
      const double t = sum + y;
      carry = (t - sum) - y;
      sum = t;
    }
    if (sum <= 1.0) break;
    const double scale =
        round < 3 ? 1.0 / sum : 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
    for (double& w : window.weights) w *= scale;
  }
  return window;
}

namespace {

// result = sum_k Poisson(q t; k) * P^k * start, with P applied from the left
// (forward = true, row vector) or the right (backward, column vector).
std::vector<double> propagate(const UniformizedChain& chain,
                              std::vector<double> vec, double t, double eps,
                              bool forward) {
  if (t < 0.0) throw ModelError("transient analysis needs t >= 0");
  const double lambda = chain.q * t;
  if (lambda == 0.0) return vec;

  const PoissonWindow window = poisson_weights(lambda, eps);
  std::vector<double> result(vec.size(), 0.0);
  std::vector<double> next(vec.size(), 0.0);

  for (std::size_t k = 0; true; ++k) {
    if (k >= window.left) {
      const double w = window.weights[k - window.left];
      for (std::size_t i = 0; i < vec.size(); ++i) result[i] += w * vec[i];
      if (k == window.right) break;
    }
    std::fill(next.begin(), next.end(), 0.0);
    if (forward) {
      chain.p.mul_left(vec, next);
    } else {
      chain.p.mul_right(vec, next);
    }
    vec.swap(next);
  }
  return result;
}

void check_distribution(const Ctmc& ctmc, Distribution& pi) {
  if (pi.size() != ctmc.num_states()) {
    throw ModelError("distribution size does not match the state space");
  }
  double sum = 0.0;
  for (double& x : pi) {
    if (x < 0.0) {
      if (x < -1e-12) throw ModelError("distribution has a negative entry");
      x = 0.0;
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ModelError("distribution does not sum to 1");
  }
}

}  // namespace

Distribution transient_forward(const Ctmc& ctmc, Distribution pi0, double t,
                               const SolverSettings& settings) {
  check_distribution(ctmc, pi0);
  const UniformizedChain chain = uniformize(ctmc, settings.uniformization_factor);
  return propagate(chain, std::move(pi0), t, settings.epsilon_transient, true);
}

std::vector<double> transient_backward(
    const Ctmc& ctmc, std::vector<double> v, double t,
    const std::vector<std::uint8_t>& restrict_states,
    const SolverSettings& settings) {
  if (v.size() != ctmc.num_states() ||
      restrict_states.size() != ctmc.num_states()) {
    throw ModelError("vector size does not match the state space");
  }
  RestrictedPropagator prop(ctmc, restrict_states, settings);
  prop.advance(v, t);
  return v;
}

TransientPropagator::TransientPropagator(const Ctmc& ctmc,
                                         SolverSettings settings)
    : chain_(uniformize(ctmc, settings.uniformization_factor)),
      settings_(settings) {}

void TransientPropagator::advance(Distribution& pi, double dt) const {
  pi = propagate(chain_, std::move(pi), dt, settings_.epsilon_transient, true);
}

RestrictedPropagator::RestrictedPropagator(
    const Ctmc& ctmc, const std::vector<std::uint8_t>& restrict_states,
    SolverSettings settings)
    : settings_(settings) {
  const auto exit = ctmc.exit_rates();
  double max_exit = 0.0;
  for (std::size_t s = 0; s < exit.size(); ++s) {
    if (restrict_states[s]) max_exit = std::max(max_exit, exit[s]);
  }
  chain_.q = max_exit > 0.0 ? settings.uniformization_factor * max_exit : 1.0;
  chain_.p = build_uniformized_matrix(ctmc, chain_.q, &restrict_states);
}

void RestrictedPropagator::advance(std::vector<double>& v, double dt) const {
  v = propagate(chain_, std::move(v), dt, settings_.epsilon_transient, false);
}

namespace {

// Backward reachability check: in an explored chain every state is reachable
// from init, so the reachable set is strongly connected iff every state can
// reach init again.
void check_irreducible(const Ctmc& ctmc) {
  const std::size_t n = ctmc.num_states();
  if (n <= 1) return;
  std::vector<std::vector<StateIndex>> incoming(n);
  for (const auto& t : ctmc.transitions) {
    if (t.src != t.dst) incoming[t.dst].push_back(t.src);
  }
  std::vector<std::uint8_t> can_reach_init(n, 0);
  std::deque<StateIndex> queue{ctmc.init};
  can_reach_init[ctmc.init] = 1;
  while (!queue.empty()) {
    const StateIndex s = queue.front();
    queue.pop_front();
    for (StateIndex pred : incoming[s]) {
      if (!can_reach_init[pred]) {
        can_reach_init[pred] = 1;
        queue.push_back(pred);
      }
    }
  }
  for (StateIndex s = 0; s < n; ++s) {
    if (!can_reach_init[s]) {
      throw ModelError("chain is not irreducible: state " +
                       ctmc.describe_state(s) +
                       " lies outside the single recurrent class");
    }
  }
}

double steady_residual(const Ctmc& ctmc, const std::vector<double>& exit,
                       const Distribution& pi) {
  // max-norm of pi Q; self-loops appear in both terms and cancel
  std::vector<double> residual(pi.size(), 0.0);
  for (std::size_t s = 0; s < pi.size(); ++s) {
    residual[s] -= pi[s] * exit[s];
  }
  for (const auto& t : ctmc.transitions) {
    residual[t.dst] += pi[t.src] * t.rate;
  }
  double norm = 0.0;
  for (double r : residual) norm = std::max(norm, std::abs(r));
  return norm;
}

// Stops when the geometrically extrapolated distance to the fixed point
// drops below epsilon relative to the largest entry: with contraction ratio
// r estimated from successive sup-norm changes, the remaining error after a
// change of size d is about d * r / (1 - r). A per-element relative test
// would instead wait for the astronomically small tail entries, which relax
// orders of magnitude more slowly than anything the queries can observe.
bool power_method(const UniformizedChain& chain, Distribution& pi,
                  double epsilon, int max_iter) {
  const std::size_t n = chain.p.n;
  Distribution next(n, 0.0);
  double prev_diff = -1.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    chain.p.mul_left(pi, next);
    double max_diff = 0.0;
    double max_entry = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_diff = std::max(max_diff, std::abs(next[i] - pi[i]));
      max_entry = std::max(max_entry, next[i]);
    }
    pi.swap(next);

    bool converged = max_diff == 0.0;
    if (!converged && prev_diff > 0.0) {
      const double ratio = max_diff / prev_diff;
      converged = ratio < 1.0 &&
                  max_diff * ratio / (1.0 - ratio) <= epsilon * max_entry;
    }
    prev_diff = max_diff;
    if (converged) {
      double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
      for (double& x : pi) x /= sum;
      return true;
    }
  }
  return false;
}

bool gauss_seidel(const Ctmc& ctmc, Distribution& pi, double epsilon,
                  int max_sweeps) {
  const std::size_t n = ctmc.num_states();
  // incoming off-diagonal rates per state
  std::vector<std::vector<std::pair<StateIndex, double>>> incoming(n);
  std::vector<double> net_exit(n, 0.0);
  for (const auto& t : ctmc.transitions) {
    if (t.src == t.dst) continue;
    incoming[t.dst].emplace_back(t.src, t.rate);
    net_exit[t.src] += t.rate;
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (net_exit[s] == 0.0 && n > 1) {
      throw ModelError("chain is not irreducible: state " +
                       ctmc.describe_state(static_cast<StateIndex>(s)) +
                       " is absorbing");
    }
  }
  if (n == 1) {
    pi.assign(1, 1.0);
    return true;
  }

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_rel = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double inflow = 0.0;
      for (const auto& [src, rate] : incoming[s]) inflow += pi[src] * rate;
      const double updated = inflow / net_exit[s];
      const double diff = std::abs(updated - pi[s]);
      max_rel = std::max(max_rel, diff / std::max(updated, 1e-300));
      pi[s] = updated;
    }
    double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
    if (sum <= 0.0) return false;
    for (double& x : pi) x /= sum;
    if (max_rel <= epsilon) return true;
  }
  return false;
}

}  // namespace

Distribution steady_state(const Ctmc& ctmc, const SolverSettings& settings) {
  check_irreducible(ctmc);
  const std::size_t n = ctmc.num_states();
  Distribution pi(n, 1.0 / static_cast<double>(n));
  if (n == 1) return pi;

  bool converged = false;
  if (settings.method == SolverSettings::Method::kPower) {
    const UniformizedChain chain =
        uniformize(ctmc, settings.uniformization_factor);
    converged = power_method(chain, pi, settings.epsilon_ss, settings.max_iter);
  }
  if (!converged) {
    // Either Gauss-Seidel was requested outright or power iteration ran out
    // of its budget; restart from a flat guess and solve the balance
    // equations in place.
    pi.assign(n, 1.0 / static_cast<double>(n));
    converged =
        gauss_seidel(ctmc, pi, settings.epsilon_ss, settings.max_iter_gs);
  }
  if (!converged) {
    const double residual = steady_residual(ctmc, ctmc.exit_rates(), pi);
    throw ConvergenceError(
        "steady-state solution did not converge (power and Gauss-Seidel "
        "exhausted, residual max-norm " +
        std::to_string(residual) + ")");
  }
  return pi;
}

std::vector<double> unbounded_until(const Ctmc& ctmc,
                                    const std::vector<std::uint8_t>& phi,
                                    const std::vector<std::uint8_t>& psi,
                                    const SolverSettings& settings) {
  const std::size_t n = ctmc.num_states();
  if (phi.size() != n || psi.size() != n) {
    throw ModelError("predicate size does not match the state space");
  }

  std::vector<std::vector<StateIndex>> incoming(n);
  std::vector<double> net_exit(n, 0.0);
  for (const auto& t : ctmc.transitions) {
    if (t.src == t.dst) continue;
    incoming[t.dst].push_back(t.src);
    net_exit[t.src] += t.rate;
  }

  // can_reach: states with some path to psi through phi-states
  std::vector<std::uint8_t> can_reach(n, 0);
  std::deque<StateIndex> queue;
  for (StateIndex s = 0; s < n; ++s) {
    if (psi[s]) {
      can_reach[s] = 1;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const StateIndex s = queue.front();
    queue.pop_front();
    for (StateIndex pred : incoming[s]) {
      if (!can_reach[pred] && phi[pred] && !psi[pred]) {
        can_reach[pred] = 1;
        queue.push_back(pred);
      }
    }
  }

  // certain: phi-states that cannot wander into a probability-zero state, so
  // they reach psi with probability one
  std::vector<std::uint8_t> reaches_zero(n, 0);
  for (StateIndex s = 0; s < n; ++s) {
    if (!psi[s] && !can_reach[s]) {
      reaches_zero[s] = 1;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const StateIndex s = queue.front();
    queue.pop_front();
    for (StateIndex pred : incoming[s]) {
      if (!reaches_zero[pred] && phi[pred] && !psi[pred]) {
        reaches_zero[pred] = 1;
        queue.push_back(pred);
      }
    }
  }

  std::vector<double> x(n, 0.0);
  std::vector<std::uint8_t> solve(n, 0);
  bool any_unknown = false;
  for (StateIndex s = 0; s < n; ++s) {
    if (psi[s]) {
      x[s] = 1.0;
    } else if (!can_reach[s]) {
      x[s] = 0.0;
    } else if (!reaches_zero[s]) {
      x[s] = 1.0;
    } else {
      solve[s] = 1;
      any_unknown = true;
    }
  }
  if (!any_unknown) return x;

  // Gauss-Seidel on the embedded jump chain for the remaining states.
  std::vector<std::vector<std::pair<StateIndex, double>>> outgoing(n);
  for (const auto& t : ctmc.transitions) {
    if (t.src != t.dst && solve[t.src]) {
      outgoing[t.src].emplace_back(t.dst, t.rate);
    }
  }
  for (int sweep = 0; sweep < settings.max_iter_gs; ++sweep) {
    double max_diff = 0.0;
    for (StateIndex s = 0; s < n; ++s) {
      if (!solve[s]) continue;
      double acc = 0.0;
      for (const auto& [dst, rate] : outgoing[s]) acc += rate * x[dst];
      const double updated = acc / net_exit[s];
      max_diff = std::max(max_diff, std::abs(updated - x[s]));
      x[s] = updated;
    }
    if (max_diff <= settings.epsilon_ss) return x;
  }
  throw ConvergenceError("unbounded-until linear system did not converge");
}

}  // namespace rekey
