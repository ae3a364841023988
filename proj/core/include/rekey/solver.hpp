#pragma once

#include <cstdint>
#include <vector>

#include "rekey/ctmc.hpp"

namespace rekey {

/// Probability vector indexed by state.
using Distribution = std::vector<double>;

Distribution point_distribution(std::size_t n, StateIndex at);

struct SolverSettings {
  enum class Method { kPower, kGaussSeidel };

  double epsilon_transient = 1e-10;  // Poisson truncation mass bound
  double epsilon_ss = 1e-9;          // relative convergence threshold
  int max_iter = 10000;              // power-method iteration cap
  int max_iter_gs = 100000;          // Gauss-Seidel sweep cap
  Method method = Method::kPower;    // steady-state method preference
  double uniformization_factor = 1.02;
};

/// Row-compressed sparse matrix, square.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<StateIndex> col;
  std::vector<double> val;

  /// y = x * M (row vector times matrix). y must be zeroed, size n.
  void mul_left(const std::vector<double>& x, std::vector<double>& y) const;
  /// y = M * x. y must be zeroed, size n.
  void mul_right(const std::vector<double>& x, std::vector<double>& y) const;
};

/// Uniformized jump chain: q >= max exit rate, P = I + Q/q row-stochastic.
struct UniformizedChain {
  double q = 1.0;
  SparseMatrix p;
};

/// Builds the uniformized chain with q = factor * max exit rate. A chain with
/// no exits (all states absorbing) uniformizes to q = 1, P = I.
UniformizedChain uniformize(const Ctmc& ctmc, double factor = 1.02);

struct PoissonWindow {
  std::size_t left = 0;
  std::size_t right = 0;
  std::vector<double> weights;  // weights[k - left] ~ Poisson(lambda; k)
};

/// Poisson probabilities on a truncated window. The truncated mass is at most
/// eps, split between the two tails, so the returned weights sum to a value in
/// [1 - eps, 1]. Weights are evaluated in log space from the mode outward to
/// stay finite for very large lambda.
PoissonWindow poisson_weights(double lambda, double eps);

/// Transient distribution pi(t) = pi0 * e^{Qt} via uniformization.
Distribution transient_forward(const Ctmc& ctmc, Distribution pi0, double t,
                               const SolverSettings& settings = {});

/// u(t) = e^{Q~ t} v, where Q~ makes every state outside `restrict_states`
/// absorbing. For v = indicator of the restricted set, u(t)[s] is the
/// probability of remaining inside the set throughout [0, t] from s.
std::vector<double> transient_backward(
    const Ctmc& ctmc, std::vector<double> v, double t,
    const std::vector<std::uint8_t>& restrict_states,
    const SolverSettings& settings = {});

/// Stationary distribution of an irreducible chain (pi Q = 0, sum pi = 1).
/// Power iteration on the uniformized chain first; if it does not converge
/// within max_iter, the balance equations are solved by Gauss-Seidel sweeps.
Distribution steady_state(const Ctmc& ctmc, const SolverSettings& settings = {});

/// Per-state probability of reaching a psi-state along phi-states, solved on
/// the embedded jump chain. States that reach psi with probability one or
/// zero are identified graph-theoretically; the rest go through Gauss-Seidel.
std::vector<double> unbounded_until(const Ctmc& ctmc,
                                    const std::vector<std::uint8_t>& phi,
                                    const std::vector<std::uint8_t>& psi,
                                    const SolverSettings& settings = {});

/// Incremental forward propagation, for curves evaluated at increasing times.
class TransientPropagator {
 public:
  TransientPropagator(const Ctmc& ctmc, SolverSettings settings = {});

  /// Advances pi by dt days in place.
  void advance(Distribution& pi, double dt) const;

 private:
  UniformizedChain chain_;
  SolverSettings settings_;
};

/// Incremental propagation on the restricted (absorbing-outside) chain.
class RestrictedPropagator {
 public:
  RestrictedPropagator(const Ctmc& ctmc,
                       const std::vector<std::uint8_t>& restrict_states,
                       SolverSettings settings = {});

  void advance(std::vector<double>& v, double dt) const;

 private:
  UniformizedChain chain_;
  SolverSettings settings_;
};

}  // namespace rekey
