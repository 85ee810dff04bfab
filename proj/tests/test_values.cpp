#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "sgsolve/examples.hpp"
#include "sgsolve/modified.hpp"
#include "sgsolve/occupancy.hpp"
#include "sgsolve/values.hpp"
#include "test_util.hpp"

using namespace sgsolve;

namespace {

// Independent MDP oracle: policy iteration with exact Gaussian solves.
std::vector<double> policy_iteration_value(const StochasticGame& g,
                                           double lambda) {
  const int n = g.num_states();
  std::vector<int> policy(n, 0);
  std::vector<double> v(n, 0.0);
  const auto evaluate = [&]() {
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (int s = 0; s < n; ++s) {
      const int k = policy[s];
      a[s][s] += 1.0;
      a[s][n] = (1.0 - lambda) * g.payoff[s][k][0];
      for (int s2 = 0; s2 < n; ++s2)
        a[s][s2] -= lambda * g.transition[s][k][s2];
    }
    for (int c = 0; c < n; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
      std::swap(a[c], a[piv]);
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        const double f = a[r][c] / a[c][c];
        for (int cc = c; cc <= n; ++cc) a[r][cc] -= f * a[c][cc];
      }
    }
    for (int s = 0; s < n; ++s) v[s] = a[s][n] / a[s][s];
  };
  for (int iter = 0; iter < 200; ++iter) {
    evaluate();
    bool changed = false;
    for (int s = 0; s < n; ++s) {
      double best = -1e300;
      int arg = policy[s];
      for (int k = 0; k < g.num_profiles(s); ++k) {
        double q = (1.0 - lambda) * g.payoff[s][k][0];
        for (int s2 = 0; s2 < n; ++s2)
          q += lambda * g.transition[s][k][s2] * v[s2];
        if (q > best + 1e-12) {
          best = q;
          arg = k;
        }
      }
      if (arg != policy[s]) {
        policy[s] = arg;
        changed = true;
      }
    }
    if (!changed) break;
  }
  evaluate();
  return v;
}

// Closed-form discounted value of the Big Match from s0 for player 1 under
// stationary (p = P(T), y = P(L)).
double big_match_value(double lambda, double p, double y) {
  return ((1.0 - lambda) * (1.0 - y) + lambda * p * y) /
         (1.0 - lambda * (1.0 - p));
}

StochasticGame constant_game(double c) {
  StochasticGame g;
  g.players = {"p1", "p2"};
  g.states = {"s0"};
  g.actions = {{{"a"}, {"b"}}};
  g.payoff = {{{c, c}}};
  g.transition = {{{1.0}}};
  g.payoff_bound = std::fabs(c);
  return g;
}

}  // namespace

TEST_CASE("discounted_minmax on MDPs matches policy iteration") {
  std::mt19937_64 rng(401);
  for (int trial = 0; trial < 10; ++trial) {
    const StochasticGame g = sgtest::random_mdp(3, 3, rng, 2.0);
    for (double l : {0.3, 0.9}) {
      const ValueReport rep = discounted_minmax(g, 0, l);
      const std::vector<double> want = policy_iteration_value(g, l);
      for (int s = 0; s < g.num_states(); ++s)
        CHECK(rep.value[s] == doctest::Approx(want[s]).epsilon(1e-7).scale(1.0));
      CHECK(rep.residual <= 1e-9 * (1.0 - l) / (2.0 * l));
    }
  }
}

TEST_CASE("big match discounted values against the closed-form grid") {
  const StochasticGame g = big_match_game();
  const double l = 0.9;
  const ValueReport rep = discounted_minmax(g, 0, l);
  // Brute-force stationary minimax over the (p, y) grid, step 1e-3.  For the
  // Big Match the discounted minmax is attained in stationary strategies.
  double best_y = 1e300;
  for (int yi = 0; yi <= 1000; ++yi) {
    const double y = yi / 1000.0;
    double best_p = -1e300;
    for (int pi = 0; pi <= 1000; ++pi)
      best_p = std::max(best_p, big_match_value(l, pi / 1000.0, y));
    best_y = std::min(best_y, best_p);
  }
  CHECK(rep.value[0] == doctest::Approx(best_y).epsilon(5e-3));
  // Absorbing states are exact at every discount.
  for (double l2 : {0.3, 0.7, 0.99}) {
    const ValueReport r2 = discounted_minmax(g, 0, l2);
    CHECK(r2.value[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r2.value[2] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("maxmin equals minmax in two-player zero-sum-like evaluations") {
  // For a single opponent the coordinated adversary is just that opponent, so
  // maxmin and minmax coincide (matrix games have values).
  std::mt19937_64 rng(403);
  for (int trial = 0; trial < 5; ++trial) {
    const StochasticGame g = sgtest::random_game(2, 2, 2, rng);
    const ValueReport lo = discounted_maxmin(g, 0, 0.8);
    const ValueReport hi = discounted_minmax(g, 0, 0.8);
    for (int s = 0; s < g.num_states(); ++s)
      CHECK(lo.value[s] == doctest::Approx(hi.value[s]).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("uniform_value limits") {
  const StochasticGame bm = big_match_game();
  const UniformValueEstimate mm = uniform_value(bm, 0, ValueKind::kMaxmin);
  CHECK(mm.limit[0] == doctest::Approx(0.5).epsilon(1e-2));

  const StochasticGame ex2 = example2_game();
  const UniformValueEstimate v2 = uniform_value(ex2, 0, ValueKind::kMinmax);
  CHECK(v2.limit[0] == doctest::Approx(3.0).epsilon(1e-2 / 3.0));
  CHECK(v2.limit[1] == doctest::Approx(3.0).epsilon(1e-2 / 3.0));

  const StochasticGame c = constant_game(1.25);
  const UniformValueEstimate vc = uniform_value(c, 0, ValueKind::kMinmax);
  // Exact up to the per-point Shapley stopping tolerance of the grid solves.
  CHECK(vc.limit[0] == doctest::Approx(1.25).epsilon(2e-6));
  CHECK(!vc.fallback[0]);
}

TEST_CASE("modified_best_response reduces to the MDP best response") {
  std::mt19937_64 rng(407);
  for (int trial = 0; trial < 10; ++trial) {
    const StochasticGame g = sgtest::random_mdp(3, 3, rng, 2.0);
    const double l = 0.8;
    const ModifiedSpec spec = unmodified_spec(g, 0, l);
    const BestResponse br =
        modified_best_response(g, spec, 0, uniform_profile(g));
    CHECK(br.value ==
          doctest::Approx(policy_iteration_value(g, l)[0]).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("modified_best_response dominates random challengers") {
  std::mt19937_64 rng(409);
  for (int trial = 0; trial < 3; ++trial) {
    const StochasticGame g = sgtest::random_game(2, 3, 2, rng, 2.0);
    const StationaryProfile opp = sgtest::random_profile(g, rng);
    const double l = 0.85;
    ModifiedSpec spec = unmodified_spec(g, 0, l);
    spec.cutoffs[0][0] = 0.3;  // make the cap bind sometimes
    const BestResponse br = modified_best_response(g, spec, 0, opp);
    // The recovered strategy achieves the LP value.
    StationaryProfile mine = opp;
    mine.strategies[0] = br.strategy;
    CHECK(modified_payoff_profile(g, spec, mine)[0] ==
          doctest::Approx(br.value).epsilon(1e-6).scale(1.0));
    for (int challenge = 0; challenge < 1000; ++challenge) {
      StationaryProfile ch = opp;
      ch.strategies[0] = sgtest::random_strategy(g, 0, rng);
      CHECK(modified_payoff_profile(g, spec, ch)[0] <= br.value + 1e-7);
    }
  }
}

TEST_CASE("example 1 best responses depend on the initial state") {
  const StochasticGame g = example1_game(6.0 / 7.0, 0.5);
  const StationaryProfile none = uniform_profile(g);
  const BestResponse from_s0 =
      modified_best_response(g, example1_spec(g, 0, 0.6), 0, none);
  CHECK(from_s0.strategy.prob[1][1] == doctest::Approx(1.0));  // plays B
  const BestResponse from_s1 =
      modified_best_response(g, example1_spec(g, 1, 0.6), 0, none);
  CHECK(from_s1.strategy.prob[1][0] == doctest::Approx(1.0));  // plays T
}

TEST_CASE("big match best response against pure L has value lambda") {
  // Against pure L the block terms are alpha * min{0, 1/2} = 0 at s0 and
  // (1 - alpha) at s2, so the optimum pushes alpha to its minimum 1 - lambda.
  const StochasticGame g = big_match_game();
  for (double l : {0.6, 0.9}) {
    const ModifiedSpec spec = big_match_spec(g, 0, l);
    StationaryProfile opp = uniform_profile(g);
    opp.strategies[1].prob[0] = {1.0, 0.0};
    const BestResponse br = modified_best_response(g, spec, 0, opp);
    // 1-d oracle over the reachable alpha range [1-lambda, 1].
    double want = -1e300;
    for (int i = 0; i <= 10000; ++i) {
      const double alpha = (1.0 - l) + i * (l / 10000.0);
      want = std::max(want, 1.0 - alpha);
    }
    CHECK(br.value == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("stationary_equilibrium certifies small random games") {
  std::mt19937_64 rng(411);
  for (int seed = 1; seed <= 6; ++seed) {
    const StochasticGame g =
        sgtest::random_game(2, sgtest::unif_int(rng, 2, 3), 2, rng);
    const ModifiedSpec spec = unmodified_spec(g, 0, 0.8);
    const EquilibriumResult eq = stationary_equilibrium(
        g, spec, 1e-4, 20, static_cast<std::uint64_t>(seed));
    CHECK(eq.certified);
    for (double gap : eq.gaps) CHECK(gap <= 1e-4 * g.payoff_bound);
  }
}

TEST_CASE("stationary_equilibrium: single player equals the best response") {
  const StochasticGame g = example1_game(6.0 / 7.0, 0.5);
  const ModifiedSpec spec = example1_spec(g, 0, 0.6);
  const EquilibriumResult eq = stationary_equilibrium(g, spec, 1e-6);
  CHECK(eq.certified);
  const BestResponse br =
      modified_best_response(g, spec, 0, uniform_profile(g));
  CHECK(eq.payoffs[0] == doctest::Approx(br.value).epsilon(1e-6).scale(1.0));
  CHECK(eq.profile.strategies[0].prob[1][1] == doctest::Approx(1.0));  // B
}

TEST_CASE("trace_equilibria: example 2 payoffs climb toward 2") {
  const StochasticGame g = example2_game();
  const ModifiedSpec spec = example2_spec(g, 0, 0.5);
  const std::vector<double> grid = {0.5, 0.75, 0.9, 0.99, 0.999};
  const std::vector<EquilibriumResult> trace =
      trace_equilibria(g, spec, grid, 1e-6);
  REQUIRE(trace.size() == grid.size());
  for (size_t i = 0; i < trace.size(); ++i) {
    CHECK(trace[i].certified);
    CHECK(trace[i].payoffs[0] ==
          doctest::Approx(4.0 * grid[i] / (1.0 + grid[i])).epsilon(1e-6));
    if (i > 0) CHECK(trace[i].payoffs[0] >= trace[i - 1].payoffs[0] - 1e-9);
  }
  CHECK(trace.back().payoffs[0] == doctest::Approx(2.0).epsilon(1e-3));

  // Constant game: identical certified profile at every grid point.
  const StochasticGame c = constant_game(0.5);
  const std::vector<EquilibriumResult> ct =
      trace_equilibria(c, unmodified_spec(c, 0, 0.5), grid, 1e-6);
  for (const auto& r : ct) {
    CHECK(r.certified);
    CHECK(r.payoffs[0] == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("modified_minmax_stat: big match pins 1/2") {
  const StochasticGame g = big_match_game();
  for (double l : {0.9, 0.99}) {
    const ModifiedSpec spec = big_match_spec(g, 0, l);
    const StatSearchResult r = modified_minmax_stat(g, spec, 0);
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-3 / 0.5));
    CHECK(r.heuristic);
  }
}

TEST_CASE("modified_maxmin_stat: big match pins 1/3 at alpha = 2/3") {
  const StochasticGame g = big_match_game();
  const double l = 0.9;
  const ModifiedSpec spec = big_match_spec(g, 0, l);
  const StatSearchResult r = modified_maxmin_stat(g, spec, 0);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(3e-3));
  const double p = r.profile.strategies[0].prob[0][0];
  CHECK((1.0 - l) / (1.0 - l * (1.0 - p)) ==
        doctest::Approx(2.0 / 3.0).epsilon(1.5e-2));
}

TEST_CASE("stat searches collapse to classical values when the cap is loose") {
  std::mt19937_64 rng(419);
  for (int trial = 0; trial < 4; ++trial) {
    const StochasticGame g = sgtest::random_game(2, 2, 2, rng);
    const double l = 0.8;
    const ModifiedSpec spec = unmodified_spec(g, 0, l);
    const double vbar = discounted_minmax(g, 0, l).value[0];
    const double vlow = discounted_maxmin(g, 0, l).value[0];
    const StatSearchResult mm = modified_minmax_stat(g, spec, 0);
    const StatSearchResult xm = modified_maxmin_stat(g, spec, 0, 4000);
    CHECK(mm.value == doctest::Approx(vbar).epsilon(2e-3).scale(1.0));
    CHECK(xm.value == doctest::Approx(vlow).epsilon(2e-3).scale(1.0));
    // The heuristic searches never cross their exact counterparts.
    CHECK(mm.value <= vbar + 1e-6 * g.payoff_bound);
    CHECK(xm.value <= vlow + 1e-6 * g.payoff_bound);
  }
}
