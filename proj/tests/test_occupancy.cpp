#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "sgsolve/examples.hpp"
#include "sgsolve/occupancy.hpp"
#include "sgsolve/simulate.hpp"
#include "test_util.hpp"

using namespace sgsolve;

namespace {

// Independent oracle: truncated power series.  Push the state distribution
// forward under the profile and accumulate (1-lambda) lambda^n weights.
std::vector<std::vector<double>> occupation_series(const StochasticGame& g,
                                                   int s0, double lambda,
                                                   const StationaryProfile& pr,
                                                   int steps) {
  std::vector<double> dist(g.num_states(), 0.0);
  dist[s0] = 1.0;
  std::vector<std::vector<double>> t(g.num_states());
  for (int s = 0; s < g.num_states(); ++s)
    t[s].assign(g.num_profiles(s), 0.0);
  double w = 1.0 - lambda;
  for (int n = 0; n < steps; ++n) {
    std::vector<double> next(g.num_states(), 0.0);
    for (int s = 0; s < g.num_states(); ++s) {
      if (dist[s] == 0.0) continue;
      for (int k = 0; k < g.num_profiles(s); ++k) {
        const double m = dist[s] * pr.profile_weight(g, s, k);
        t[s][k] += w * m;
        for (int s2 = 0; s2 < g.num_states(); ++s2)
          next[s2] += m * g.transition[s][k][s2];
      }
    }
    dist = std::move(next);
    w *= lambda;
  }
  return t;
}

// Independent oracle for the discounted payoff: solve (I - lambda P) v =
// (1 - lambda) u by Gaussian elimination on the profile-induced chain.
std::vector<double> value_solve(const StochasticGame& g, double lambda,
                                const StationaryProfile& pr, int player) {
  const int n = g.num_states();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (int s = 0; s < n; ++s) {
    a[s][s] = 1.0;
    for (int k = 0; k < g.num_profiles(s); ++k) {
      const double w = pr.profile_weight(g, s, k);
      a[s][n] += (1.0 - lambda) * w * g.payoff[s][k][player];
      for (int s2 = 0; s2 < n; ++s2)
        a[s][s2] -= lambda * w * g.transition[s][k][s2];
    }
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
  std::vector<double> v(n);
  for (int s = 0; s < n; ++s) v[s] = a[s][n] / a[s][s];
  return v;
}

StochasticGame two_action_mdp(double ua, double ub) {
  StochasticGame g;
  g.players = {"p1"};
  g.states = {"s0"};
  g.actions = {{{"a", "b"}}};
  g.payoff = {{{ua}, {ub}}};
  g.transition = {{{1.0}, {1.0}}};
  g.payoff_bound = g.recompute_payoff_bound();
  return g;
}

// Automaton that plays action a at stage 0, then b forever.
AutomatonStrategy a_then_b() {
  AutomatonStrategy au;
  au.memory = 2;
  au.initial = 0;
  au.emit = {{{1.0, 0.0}}, {{0.0, 1.0}}};
  au.update = [](int, int, int, int) { return 1; };
  return au;
}

}  // namespace

TEST_CASE("occupation_stationary: closed forms and invariants") {
  const StochasticGame one = two_action_mdp(1.0, 1.0);
  StationaryProfile pure{{pure_strategy(one, 0, {0})}};
  OccupationVector occ = occupation_stationary(one, 0, 0.7, pure);
  CHECK(occ.entries[0][0] == doctest::Approx(1.0).epsilon(1e-12));

  const StochasticGame ex2 = example2_game();
  const StationaryProfile u2 = uniform_profile(ex2);
  occ = occupation_stationary(ex2, 0, 0.5, u2);
  CHECK(occ.state_total(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(occ.state_total(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const StochasticGame bm = big_match_game();
  for (double p : {0.2, 0.5, 0.9}) {
    StationaryProfile pr = uniform_profile(bm);
    pr.strategies[0].prob[0] = {p, 1.0 - p};
    for (double l : {0.3, 0.9, 0.99}) {
      const OccupationVector t = occupation_stationary(bm, 0, l, pr);
      CHECK(t.state_total(0) ==
            doctest::Approx((1.0 - l) / (1.0 - l * (1.0 - p))).epsilon(1e-9));
      CHECK(occupation_residual(bm, t) <= 1e-9);
      CHECK(t.total() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("occupation_stationary matches the power-series oracle") {
  std::mt19937_64 rng(201);
  for (int trial = 0; trial < 20; ++trial) {
    const StochasticGame g = sgtest::random_game(2, 3, 2, rng);
    const StationaryProfile pr = sgtest::random_profile(g, rng);
    for (double l : {0.3, 0.9}) {
      const OccupationVector occ = occupation_stationary(g, 0, l, pr);
      const auto series = occupation_series(g, 0, l, pr, 700);
      for (int s = 0; s < g.num_states(); ++s)
        for (int k = 0; k < g.num_profiles(s); ++k)
          CHECK(occ.entries[s][k] ==
                doctest::Approx(series[s][k]).epsilon(1e-8).scale(1.0));
      CHECK(occupation_residual(g, occ) <= 1e-9);
    }
  }
}

TEST_CASE("occupation_automaton agrees with the stationary construction") {
  std::mt19937_64 rng(203);
  const StochasticGame g = sgtest::random_game(2, 3, 2, rng);
  const StationaryProfile pr = sgtest::random_profile(g, rng);
  std::vector<AutomatonStrategy> autos;
  for (int i = 0; i < 2; ++i)
    autos.push_back(as_automaton(g, pr.strategies[i]));
  const OccupationVector a = occupation_automaton(g, 0, 0.9, autos);
  const OccupationVector b = occupation_stationary(g, 0, 0.9, pr);
  for (int s = 0; s < g.num_states(); ++s)
    for (int k = 0; k < g.num_profiles(s); ++k)
      CHECK(a.entries[s][k] ==
            doctest::Approx(b.entries[s][k]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("occupation_automaton: play a once then b forever") {
  const StochasticGame g = two_action_mdp(1.0, 0.0);
  for (double l : {0.3, 0.8}) {
    const OccupationVector occ = occupation_automaton(g, 0, l, {a_then_b()});
    CHECK(occ.entries[0][0] == doctest::Approx(1.0 - l).epsilon(1e-12));
    CHECK(occ.entries[0][1] == doctest::Approx(l).epsilon(1e-12));
  }
}

TEST_CASE("occupation_automaton cycler payoff matches Monte Carlo") {
  // Two-phase cycler on example 2: it has a single action everywhere, so the
  // automaton only shapes memory; the exact payoff must still fall inside the
  // Monte Carlo confidence interval.
  const StochasticGame g = example2_game();
  AutomatonStrategy cyc;
  cyc.memory = 2;
  cyc.initial = 0;
  cyc.emit = {{{1.0}, {1.0}}, {{1.0}, {1.0}}};
  cyc.update = [](int m, int, int, int) { return 1 - m; };
  const double lambda = 0.95;
  const OccupationVector occ = occupation_automaton(g, 0, lambda, {cyc});
  const double exact = discounted_payoff(g, occ)[0];
  const McEstimate mc = mc_discounted_payoff(g, {cyc}, 0, lambda, 2000, 5);
  CHECK(std::fabs(exact - mc.estimate[0]) <= mc.ci[0] + 1e-9);
}

TEST_CASE("discounted_payoff closed forms and linear-solve oracle") {
  const StochasticGame ex2 = example2_game();
  const StationaryProfile pr = uniform_profile(ex2);
  for (double l : {0.5, 0.9, 0.999}) {
    const OccupationVector occ = occupation_stationary(ex2, 0, l, pr);
    CHECK(discounted_payoff(ex2, occ)[0] ==
          doctest::Approx(6.0 * l / (1.0 + l)).epsilon(1e-9));
  }
  CHECK(discounted_payoff(
            ex2, occupation_stationary(ex2, 0, 0.999, pr))[0] ==
        doctest::Approx(3.0).epsilon(5e-3 / 3.0));

  std::mt19937_64 rng(207);
  for (int trial = 0; trial < 10; ++trial) {
    const StochasticGame g = sgtest::random_game(2, 4, 2, rng, 2.0);
    const StationaryProfile rp = sgtest::random_profile(g, rng);
    for (double l : {0.3, 0.9, 0.99}) {
      const OccupationVector occ = occupation_stationary(g, 0, l, rp);
      const std::vector<double> got = discounted_payoff(g, occ);
      for (int i = 0; i < 2; ++i)
        CHECK(got[i] ==
              doctest::Approx(value_solve(g, l, rp, i)[0]).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("n_stage_payoff: hand values and the Cesaro limit") {
  const StochasticGame ex2 = example2_game();
  const StationaryProfile pr = uniform_profile(ex2);
  CHECK(n_stage_payoff(ex2, 0, pr, 1)[0] == doctest::Approx(0.0));
  CHECK(n_stage_payoff(ex2, 0, pr, 2)[0] == doctest::Approx(3.0));
  CHECK(n_stage_payoff(ex2, 0, pr, 2000)[0] ==
        doctest::Approx(3.0).epsilon(2e-3 / 3.0));
  // Automaton overload agrees with the stationary one.
  std::vector<AutomatonStrategy> autos = {as_automaton(ex2, pr.strategies[0])};
  CHECK(n_stage_payoff(ex2, 0, autos, 17)[0] ==
        doctest::Approx(n_stage_payoff(ex2, 0, pr, 17)[0]).epsilon(1e-12));
}

TEST_CASE("block_breakdown: closed forms and the decomposition identity") {
  const StochasticGame ex2 = example2_game();
  const StationaryProfile pr = uniform_profile(ex2);
  const OccupationVector occ = occupation_stationary(ex2, 0, 0.5, pr);

  const BlockBreakdown triv = block_breakdown(ex2, occ, {{0, 1}});
  CHECK(triv.time[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(triv.payoff[0][0] == doctest::Approx(2.0).epsilon(1e-12));

  const BlockBreakdown split = block_breakdown(ex2, occ, {{0}, {1}});
  CHECK(split.time[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(split.time[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(split.payoff[0][0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(split.payoff[1][0] == doctest::Approx(2.0).epsilon(1e-12));

  const StochasticGame bm = big_match_game();
  StationaryProfile bp = uniform_profile(bm);
  bp.strategies[0].prob[0] = {0.3, 0.7};
  bp.strategies[1].prob[0] = {1.0, 0.0};
  const double l = 0.9;
  const OccupationVector bocc = occupation_stationary(bm, 0, l, bp);
  const BlockBreakdown bb = block_breakdown(bm, bocc, {{0}, {1}, {2}});
  CHECK(bb.time[0] ==
        doctest::Approx((1.0 - l) / (1.0 - l * 0.7)).epsilon(1e-9));
  CHECK(bb.time[1] == doctest::Approx(0.0).epsilon(1e-12));  // L never -> s1
  CHECK(bb.time[0] + bb.time[2] == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS(block_breakdown(ex2, occ, {{0}}));  // not a cover
}

TEST_CASE("decomposition identity on random partitions") {
  std::mt19937_64 rng(211);
  for (int trial = 0; trial < 30; ++trial) {
    const StochasticGame g = sgtest::random_game(2, 4, 2, rng, 3.0);
    const StationaryProfile pr = sgtest::random_profile(g, rng);
    const OccupationVector occ = occupation_stationary(g, 0, 0.9, pr);
    // Random 2-block partition of the 4 states.
    std::vector<std::vector<int>> blocks(2);
    blocks[0].push_back(0);
    blocks[1].push_back(1);
    for (int s = 2; s < 4; ++s) blocks[rng() % 2].push_back(s);
    const BlockBreakdown bb = block_breakdown(g, occ, blocks);
    const std::vector<double> gamma = discounted_payoff(g, occ);
    double tsum = 0.0;
    std::vector<double> usum(2, 0.0);
    for (size_t d = 0; d < blocks.size(); ++d) {
      tsum += bb.time[d];
      for (int i = 0; i < 2; ++i) usum[i] += bb.payoff[d][i];
    }
    CHECK(tsum == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 0; i < 2; ++i)
      CHECK(usum[i] == doctest::Approx(gamma[i]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("equivalent_stationary inverts occupation on visited states") {
  std::mt19937_64 rng(213);
  for (int trial = 0; trial < 20; ++trial) {
    const StochasticGame g = sgtest::random_mdp(4, 3, rng);
    const StationaryStrategy x = sgtest::random_strategy(g, 0, rng);
    const OccupationVector occ =
        occupation_stationary(g, 0, 0.9, StationaryProfile{{x}});
    const StationaryStrategy back = equivalent_stationary(g, occ, 0);
    for (int s = 0; s < g.num_states(); ++s) {
      if (occ.state_total(s) < 1e-12) continue;
      for (int a = 0; a < g.num_actions(s, 0); ++a)
        CHECK(back.prob[s][a] ==
              doctest::Approx(x.prob[s][a]).epsilon(1e-8).scale(1.0));
    }
  }
  // The a-then-b automaton extracts to x(a) = 1 - lambda.
  const StochasticGame mdp = two_action_mdp(1.0, 0.0);
  const double l = 0.6;
  const OccupationVector occ = occupation_automaton(mdp, 0, l, {a_then_b()});
  const StationaryStrategy x = equivalent_stationary(mdp, occ, 0);
  CHECK(x.prob[0][0] == doctest::Approx(1.0 - l).epsilon(1e-9));
}

TEST_CASE("extraction of a general 50/50 mixture respects the pure bounds") {
  // Mixing two pure strategies in a 1-state MDP: the extracted per-action
  // probability must stay inside [min, max] of the pure ones (here (0,1)).
  const StochasticGame mdp = two_action_mdp(1.0, 0.0);
  const double l = 0.7;
  const OccupationVector ta = occupation_stationary(
      mdp, 0, l, StationaryProfile{{pure_strategy(mdp, 0, {0})}});
  const OccupationVector tb = occupation_stationary(
      mdp, 0, l, StationaryProfile{{pure_strategy(mdp, 0, {1})}});
  OccupationVector mix = ta;
  for (int k = 0; k < 2; ++k)
    mix.entries[0][k] = 0.5 * (ta.entries[0][k] + tb.entries[0][k]);
  const StationaryStrategy x = equivalent_stationary(mdp, mix, 0);
  CHECK(x.prob[0][0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(x.prob[0][0] >= 0.0);
  CHECK(x.prob[0][0] <= 1.0);
}

TEST_CASE("mixture_stationary: endpoints, occupation identity, monotonicity") {
  std::mt19937_64 rng(217);
  int swept = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const StochasticGame g = sgtest::random_mdp(3, 2, rng);
    const StationaryStrategy x = sgtest::random_strategy(g, 0, rng);
    const StationaryStrategy xp = sgtest::random_strategy(g, 0, rng);
    const double l = 0.9;
    const OccupationVector tx =
        occupation_stationary(g, 0, l, StationaryProfile{{x}});
    const OccupationVector txp =
        occupation_stationary(g, 0, l, StationaryProfile{{xp}});
    std::vector<std::vector<std::vector<double>>> sweep;
    for (int step = 0; step <= 10; ++step) {
      const double alpha = step / 10.0;
      const StationaryStrategy xa =
          mixture_stationary(g, 0, l, x, xp, alpha);
      const OccupationVector ta =
          occupation_stationary(g, 0, l, StationaryProfile{{xa}});
      for (int s = 0; s < g.num_states(); ++s)
        for (int k = 0; k < g.num_profiles(s); ++k)
          CHECK(ta.entries[s][k] ==
                doctest::Approx(alpha * tx.entries[s][k] +
                                (1.0 - alpha) * txp.entries[s][k])
                    .epsilon(1e-8)
                    .scale(1.0));
      sweep.push_back(xa.prob);
    }
    // Endpoints reproduce the inputs on visited states.
    for (int s = 0; s < g.num_states(); ++s) {
      if (txp.state_total(s) > 1e-12)
        for (int a = 0; a < g.num_actions(s, 0); ++a)
          CHECK(sweep[0][s][a] ==
                doctest::Approx(xp.prob[s][a]).epsilon(1e-8).scale(1.0));
      if (tx.state_total(s) > 1e-12)
        for (int a = 0; a < g.num_actions(s, 0); ++a)
          CHECK(sweep[10][s][a] ==
                doctest::Approx(x.prob[s][a]).epsilon(1e-8).scale(1.0));
    }
    // Each coordinate is monotone along the sweep.
    for (int s = 0; s < g.num_states(); ++s)
      for (int a = 0; a < g.num_actions(s, 0); ++a) {
        bool up = true, down = true;
        for (int step = 0; step < 10; ++step) {
          const double d = sweep[step + 1][s][a] - sweep[step][s][a];
          if (d < -1e-9) up = false;
          if (d > 1e-9) down = false;
        }
        CHECK((up || down));
      }
    ++swept;
  }
  CHECK(swept == 100);
}

TEST_CASE("mixture_stationary in the 1-state 2-action MDP") {
  // alpha-mix of pure a and pure b: time share is alpha directly.
  const StochasticGame mdp = two_action_mdp(1.0, 0.0);
  const StationaryStrategy xa = pure_strategy(mdp, 0, {0});
  const StationaryStrategy xb = pure_strategy(mdp, 0, {1});
  const StationaryStrategy mid = mixture_stationary(mdp, 0, 0.5, xa, xb, 0.5);
  CHECK(mid.prob[0][0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("abel_decompose reconstructs the partial discounted sum") {
  // Constant sequence: both sides are the geometric partial sum.
  std::vector<double> ones(30, 1.0);
  const double l = 0.8;
  const AbelDecomposition cd = abel_decompose(ones, l, 5);
  CHECK(cd.reconstructed() ==
        doctest::Approx((1.0 - std::pow(l, 30)) / (1.0 - l)).epsilon(1e-10));

  std::mt19937_64 rng(219);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(50);
    for (double& v : xs) v = sgtest::unif(rng, -1.0, 1.0);
    for (int m : {0, 5, 49}) {
      const AbelDecomposition d = abel_decompose(xs, 0.9, m);
      double direct = 0.0;
      for (size_t n = 0; n < xs.size(); ++n)
        direct += std::pow(0.9, static_cast<double>(n)) * xs[n];
      CHECK(d.reconstructed() == doctest::Approx(direct).epsilon(1e-10).scale(1.0));
    }
  }
  // Head weight vanishes as lambda -> 1 for fixed M.
  std::vector<double> xs(40, 1.0);
  double prev = 1e9;
  for (double l2 : {0.5, 0.9, 0.99, 0.999}) {
    const AbelDecomposition d = abel_decompose(xs, l2, 6);
    const double ratio = std::fabs(d.head) / d.reconstructed();
    CHECK(ratio < prev + 1e-12);
    prev = ratio;
  }
}
