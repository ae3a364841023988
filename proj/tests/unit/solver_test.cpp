#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "chain_builder.hpp"
#include "dense_expm.hpp"
#include "rekey/errors.hpp"
#include "rekey/solver.hpp"
#include "rekey/zigbee.hpp"

using namespace rekey;
using oracle::make_chain;
using oracle::Triplet;

namespace {

double weight_sum(const PoissonWindow& w) {
  double sum = 0.0;
  double c = 0.0;  // Kahan
  for (double x : w.weights) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

Ctmc random_chain(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> rate(0.05, 2.0);
  std::uniform_int_distribution<StateIndex> node(0, static_cast<StateIndex>(n - 1));
  std::vector<Triplet> triplets;
  // a ring keeps everything reachable; extra chords add structure
  for (StateIndex i = 0; i < n; ++i) {
    triplets.push_back({i, static_cast<StateIndex>((i + 1) % n), rate(rng)});
  }
  for (std::size_t k = 0; k < 2 * n; ++k) {
    StateIndex a = node(rng), b = node(rng);
    if (a != b) triplets.push_back({a, b, rate(rng)});
  }
  std::vector<std::uint8_t> comp(n, 0);
  for (StateIndex i = 0; i < n; i += 2) comp[i] = 1;
  return make_chain(n, triplets, comp);
}

}  // namespace

TEST_CASE("uniformize: two parallel exits give q = 1.02 * 4") {
  // both transitions leave state 0, rates 1 and 3 under distinct actions
  const Ctmc chain =
      make_chain(2, {{0, 1, 1.0, "a"}, {0, 1, 3.0, "b"}});
  const UniformizedChain u = uniformize(chain, 1.02);
  CHECK(u.q == doctest::Approx(4.08));
  for (std::size_t r = 0; r < u.p.n; ++r) {
    double sum = 0.0;
    for (std::size_t k = u.p.row_ptr[r]; k < u.p.row_ptr[r + 1]; ++k) {
      sum += u.p.val[k];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("uniformize: a chain with no transitions becomes q=1, P=I") {
  const Ctmc chain = make_chain(3, {});
  const UniformizedChain u = uniformize(chain);
  CHECK(u.q == 1.0);
  for (std::size_t r = 0; r < 3; ++r) {
    REQUIRE(u.p.row_ptr[r + 1] - u.p.row_ptr[r] == 1);
    CHECK(u.p.col[u.p.row_ptr[r]] == r);
    CHECK(u.p.val[u.p.row_ptr[r]] == doctest::Approx(1.0));
  }
}

TEST_CASE("uniformize: the home-automation peak exit rate sits at size=0") {
  const ScenarioParams ha = scenario_params(Scenario::kHA);
  const Ctmc ctmc = assemble(ha, {Strategy::kTime, 3});
  const auto exits = ctmc.exit_rates();
  double max_exit = 0.0;
  for (double e : exits) max_exit = std::max(max_exit, e);
  // at size=0 every slot is free and the reset timer still runs
  CHECK(max_exit ==
        doctest::Approx(ha.r_join * ha.max + 1.0 / 90.0).epsilon(1e-12));
  CHECK(uniformize(ctmc).q == doctest::Approx(1.02 * max_exit));
}

TEST_CASE("poisson weights: lambda = 0 degenerates to a unit mass") {
  const PoissonWindow w = poisson_weights(0.0, 1e-10);
  CHECK(w.left == 0);
  CHECK(w.right == 0);
  REQUIRE(w.weights.size() == 1);
  CHECK(w.weights[0] == 1.0);
}

TEST_CASE("poisson weights match high-precision values at lambda = 10") {
  using big = boost::multiprecision::cpp_bin_float_50;
  const PoissonWindow w = poisson_weights(10.0, 1e-10);
  REQUIRE(w.left <= 10);
  REQUIRE(w.right >= 10);

  big factorial = 1;
  for (int k = 1; k <= 10; ++k) factorial *= k;
  const big expected = exp(big(-10)) * pow(big(10), 10) / factorial;
  const double got = w.weights[10 - w.left];
  CHECK(std::abs(got - expected.convert_to<double>()) <=
        1e-12 * expected.convert_to<double>());

  const double sum = weight_sum(w);
  CHECK(sum <= 1.0);
  CHECK(sum >= 1.0 - 1e-10);
}

TEST_CASE("poisson weights behave for very large lambda") {
  const double lambda = 51000.0;
  const PoissonWindow w = poisson_weights(lambda, 1e-10);
  CHECK(w.left > 0);
  const double spread = 8.0 * std::sqrt(lambda);
  CHECK(static_cast<double>(w.left) <= lambda - spread);
  CHECK(static_cast<double>(w.right) >= lambda + spread);
  CHECK(static_cast<double>(w.right - w.left) <= 40.0 * std::sqrt(lambda));
  for (double x : w.weights) {
    CHECK(x >= 0.0);
    CHECK(std::isfinite(x));
  }
  const double sum = weight_sum(w);
  CHECK(sum <= 1.0);
  CHECK(sum >= 1.0 - 1e-10);
}

TEST_CASE("poisson weight sums stay within [1-eps, 1] across scales") {
  for (double lambda : {0.3, 1.0, 25.0, 300.0, 8000.0}) {
    for (double eps : {1e-6, 1e-10, 1e-13}) {
      const PoissonWindow w = poisson_weights(lambda, eps);
      const double sum = weight_sum(w);
      CHECK(sum <= 1.0 + 1e-15);
      CHECK(sum >= 1.0 - eps);
      for (double x : w.weights) CHECK(x >= 0.0);
    }
  }
}

TEST_CASE("transient at t=0 returns the initial distribution") {
  const Ctmc chain = make_chain(2, {{0, 1, 0.7}});
  const Distribution pi = transient_forward(chain, {0.25, 0.75}, 0.0);
  CHECK(pi[0] == doctest::Approx(0.25));
  CHECK(pi[1] == doctest::Approx(0.75));
}

TEST_CASE("transient matches the two-state closed form") {
  // A -> B at rate 1/10; pi_B(10) = 1 - e^{-1}
  const Ctmc chain = make_chain(2, {{0, 1, 0.1}});
  const Distribution pi =
      transient_forward(chain, point_distribution(2, 0), 10.0);
  CHECK(pi[1] == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("transient conserves probability mass") {
  const Ctmc ctmc = assemble(scenario_params(Scenario::kHA), {Strategy::kTime, 12});
  for (double t : {1.0, 30.0, 360.0, 3600.0}) {
    const Distribution pi =
        transient_forward(ctmc, point_distribution(ctmc.num_states(), ctmc.init), t);
    double sum = 0.0;
    for (double x : pi) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("transient agrees with the dense matrix-exponential oracle") {
  std::mt19937 rng(2024);
  for (int round = 0; round < 20; ++round) {
    const std::size_t n = 3 + round % 10;  // up to 12 states
    const Ctmc chain = random_chain(rng, n);
    Distribution pi0(n, 0.0);
    pi0[0] = 0.4;
    pi0[n - 1] = 0.6;
    for (double t : {0.3, 2.0, 11.0}) {
      const Distribution got = transient_forward(chain, pi0, t);
      const auto want = oracle::transient_reference(chain, pi0, t);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(got[i] - want[i]) <= 1e-8);
      }
    }
  }
}

TEST_CASE("backward transient: t=0 is the indicator itself") {
  const Ctmc chain = make_chain(2, {{0, 1, 0.5}});
  const std::vector<std::uint8_t> restrict_states{1, 0};
  const auto u = transient_backward(chain, {1.0, 0.0}, 0.0, restrict_states);
  CHECK(u[0] == doctest::Approx(1.0));
  CHECK(u[1] == doctest::Approx(0.0));
}

TEST_CASE("backward transient: single compromised state decays exponentially") {
  // state 0 compromised with exit rate r to the clean state
  const double r = 0.35;
  const Ctmc chain = make_chain(2, {{0, 1, r}});
  const std::vector<std::uint8_t> restrict_states{1, 0};
  for (double t : {0.5, 3.0, 10.0}) {
    const auto u = transient_backward(chain, {1.0, 0.0}, t, restrict_states);
    CHECK(u[0] == doctest::Approx(std::exp(-r * t)).epsilon(1e-10));
  }
}

TEST_CASE("backward transient agrees with forward runs on the absorbing chain") {
  std::mt19937 rng(99);
  const std::size_t n = 10;
  const Ctmc chain = random_chain(rng, n);
  const auto& restrict_states = chain.label(kCompromisedLabel);

  // forward reference: drop every transition out of a non-restricted state
  std::vector<Triplet> kept;
  for (const auto& t : chain.transitions) {
    if (restrict_states[t.src]) kept.push_back({t.src, t.dst, t.rate});
  }
  const Ctmc absorbing = make_chain(n, kept);

  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i] = restrict_states[i] ? 1.0 : 0.0;
  for (double t : {0.7, 4.0}) {
    const auto backward = transient_backward(chain, v, t, restrict_states);
    for (StateIndex s = 0; s < n; ++s) {
      Distribution start = point_distribution(n, s);
      const Distribution end = transient_forward(absorbing, start, t);
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) mass += end[i] * v[i];
      CHECK(std::abs(backward[s] - mass) <= 1e-8);
    }
  }
}

TEST_CASE("steady state of a two-state chain follows detailed balance") {
  const double a = 0.8, b = 1.7;
  const Ctmc chain = make_chain(2, {{0, 1, a}, {1, 0, b}});
  const Distribution pi = steady_state(chain);
  CHECK(pi[0] == doctest::Approx(b / (a + b)).epsilon(1e-8));
  CHECK(pi[1] == doctest::Approx(a / (a + b)).epsilon(1e-8));
}

TEST_CASE("steady state rejects reducible chains and names the witness") {
  const Ctmc chain = make_chain(3, {{0, 1, 1.0}, {1, 0, 1.0}, {0, 2, 0.5}});
  CHECK_THROWS_WITH_AS(steady_state(chain),
                       doctest::Contains("not irreducible"), ModelError);
}

TEST_CASE("steady state equals the long-horizon transient") {
  const Ctmc ctmc = assemble(scenario_params(Scenario::kHA), {Strategy::kTime, 3});
  const Distribution pi_ss = steady_state(ctmc);
  const Distribution pi_t = transient_forward(
      ctmc, point_distribution(ctmc.num_states(), ctmc.init), 3600.0);
  for (std::size_t i = 0; i < pi_ss.size(); ++i) {
    CHECK(std::abs(pi_ss[i] - pi_t[i]) <= 1e-4);
  }
}

TEST_CASE("power iteration and Gauss-Seidel agree") {
  for (const auto& [scenario, strategy] :
       std::vector<std::pair<Scenario, StrategyConfig>>{
           {Scenario::kHA, {Strategy::kTime, 1}},
           {Scenario::kHA, {Strategy::kLeave, 1}},
           {Scenario::kSE, {Strategy::kJoin, 1}}}) {
    const Ctmc ctmc = assemble(scenario_params(scenario), strategy);
    SolverSettings power;
    power.method = SolverSettings::Method::kPower;
    power.max_iter = 2000000;
    SolverSettings gs;
    gs.method = SolverSettings::Method::kGaussSeidel;
    const Distribution a = steady_state(ctmc, power);
    const Distribution b = steady_state(ctmc, gs);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::abs(a[i] - b[i]) <= 1e-6);
    }
  }
}

TEST_CASE("unbounded until: psi everywhere is certain") {
  const Ctmc chain = make_chain(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}});
  const std::vector<std::uint8_t> all(3, 1);
  const auto x = unbounded_until(chain, all, all);
  for (double v : x) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("unbounded until: compromised states always recover eventually") {
  const Ctmc ctmc = assemble(scenario_params(Scenario::kHA), {Strategy::kLeave, 5});
  const auto x = unbounded_until(ctmc, ctmc.label(kCompromisedLabel),
                                 ctmc.label(kUncompromisedLabel));
  for (std::size_t s = 0; s < ctmc.num_states(); ++s) {
    if (ctmc.label(kCompromisedLabel)[s]) {
      CHECK(x[s] == doctest::Approx(1.0));  // exact, via the graph analysis
    }
  }
}

TEST_CASE("exhausted iteration budgets raise a convergence error") {
  const Ctmc chain = make_chain(2, {{0, 1, 0.8}, {1, 0, 1.7}});
  SolverSettings starved;
  starved.max_iter = 1;
  starved.max_iter_gs = 0;
  CHECK_THROWS_WITH_AS(steady_state(chain, starved),
                       doctest::Contains("residual"), ConvergenceError);

  // a trap state keeps the reach probability strictly inside (0,1), so the
  // linear solve genuinely runs and hits its zero-sweep budget
  const Ctmc branch = make_chain(
      4, {{0, 1, 1.0}, {0, 2, 2.0}, {0, 3, 1.0}, {1, 0, 0.5}});
  const std::vector<std::uint8_t> phi{1, 1, 0, 0};
  const std::vector<std::uint8_t> psi{0, 0, 1, 0};
  CHECK_THROWS_AS(unbounded_until(branch, phi, psi, starved),
                  ConvergenceError);
}

TEST_CASE("distributions are validated and tiny negatives clamped") {
  const Ctmc chain = make_chain(2, {{0, 1, 1.0}});
  // a -1e-13 entry is rounding noise and gets clamped to zero
  CHECK_NOTHROW(transient_forward(chain, {1.0 + 1e-13, -1e-13}, 1.0));
  CHECK_THROWS_AS(transient_forward(chain, {1.001, -1e-3}, 1.0), ModelError);
  CHECK_THROWS_AS(transient_forward(chain, {0.4, 0.4}, 1.0), ModelError);
  CHECK_THROWS_AS(transient_forward(chain, {1.0}, 1.0), ModelError);
}

TEST_CASE("unbounded until: branching race gives the rate ratio") {
  // A -> B at 1, A -> C at 3; B and C absorbing; P(reach B from A) = 1/4
  const Ctmc chain = make_chain(3, {{0, 1, 1.0}, {0, 2, 3.0}});
  const std::vector<std::uint8_t> phi{1, 0, 0};
  const std::vector<std::uint8_t> psi{0, 1, 0};
  const auto x = unbounded_until(chain, phi, psi);
  CHECK(x[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(x[1] == doctest::Approx(1.0));
  CHECK(x[2] == doctest::Approx(0.0));
}
