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

std::vector<AutomatonStrategy> as_automata(const StochasticGame& g,
                                           const StationaryProfile& pr) {
  std::vector<AutomatonStrategy> out;
  for (int i = 0; i < g.num_players(); ++i)
    out.push_back(as_automaton(g, pr.strategies[i]));
  return out;
}

bool plays_equal(const PlayRecord& a, const PlayRecord& b) {
  return a.states == b.states && a.profiles == b.profiles &&
         a.payoffs == b.payoffs;
}

// Memory trace of an automaton along a play (what simulate computes
// internally but does not expose).
std::vector<int> memory_trace(const AutomatonStrategy& sigma,
                              const PlayRecord& play) {
  std::vector<int> mem{sigma.initial};
  for (size_t n = 0; n < play.profiles.size(); ++n)
    mem.push_back(sigma.update(mem.back(), play.states[n], play.profiles[n],
                               play.states[n + 1]));
  return mem;
}

// Saturating stage counter: memory m counts stages played, capped at `cap`.
AutomatonStrategy counter_automaton(const StochasticGame& g, int player,
                                    int cap) {
  AutomatonStrategy a = as_automaton(g, uniform_strategy(g, player));
  a.memory = cap + 1;
  a.emit.assign(a.memory, a.emit[0]);
  a.update = [cap](int m, int, int, int) { return std::min(m + 1, cap); };
  return a;
}

}  // namespace

TEST_CASE("split_seed separates streams") {
  CHECK(split_seed(1, 0) != split_seed(1, 1));
  CHECK(split_seed(1, 0) != split_seed(2, 0));
  CHECK(split_seed(1, 0, 0) != split_seed(1, 0, 1));
  CHECK(split_seed(7, 3, 5) == split_seed(7, 3, 5));
}

TEST_CASE("simulate is bit-reproducible given the seed") {
  std::mt19937_64 rng(401);
  const StochasticGame g = sgtest::random_game(2, 3, 2, rng, 2.0);
  const auto prof = as_automata(g, sgtest::random_profile(g, rng));
  const PlayRecord a = simulate(g, prof, 0, 200, 99);
  const PlayRecord b = simulate(g, prof, 0, 200, 99);
  CHECK(plays_equal(a, b));
  const PlayRecord c = simulate(g, prof, 0, 200, 100);
  CHECK(!plays_equal(a, c));
  CHECK(a.states.size() == 201);
  CHECK(a.profiles.size() == 200);
  CHECK_THROWS(simulate(g, prof, 0, 0, 1));
}

TEST_CASE("deterministic plays: example 2 alternates 0 and 6") {
  const StochasticGame g = example2_game();
  const auto prof = as_automata(g, uniform_profile(g));
  const PlayRecord play = simulate(g, prof, 0, 20, 1);
  for (int n = 0; n <= 20; ++n) CHECK(play.states[n] == n % 2);
  for (int n = 0; n < 20; ++n)
    CHECK(play.payoffs[n][0] == (n % 2 == 0 ? 0.0 : 6.0));
}

TEST_CASE("big match absorption time is geometric") {
  const StochasticGame g = big_match_game();
  StationaryProfile pr = uniform_profile(g);
  pr.strategies[0].prob[0] = {0.5, 0.5};  // half T, half B
  pr.strategies[1].prob[0] = {1.0, 0.0};  // pure L
  const auto prof = as_automata(g, pr);
  const int plays = 10000;
  double sum = 0.0;
  for (int j = 0; j < plays; ++j) {
    const PlayRecord play = simulate(g, prof, 0, 100, split_seed(5, j));
    int k = 0;
    while (k < 100 && play.states[k] == 0) ++k;
    REQUIRE(k < 100);  // absorption well before the horizon w.h.p.
    sum += k;
  }
  const double mean = sum / plays;
  // Geometric(1/2): mean 2, sd sqrt(2); three standard errors.
  CHECK(std::abs(mean - 2.0) <= 3.0 * std::sqrt(2.0) / std::sqrt(plays));
}

TEST_CASE("segment_runs counts block switches") {
  const Partition two = Partition::from_blocks(3, {{0}, {1, 2}});

  // Trivial partition: one run, no switches.
  PlayRecord alt;
  const int len = 12;  // number of states in the play record
  for (int n = 0; n < len; ++n) alt.states.push_back(n % 2);
  for (int n = 0; n < len - 1; ++n) {
    alt.profiles.push_back(0);
    alt.payoffs.push_back({0.0});
  }
  const RunSegmentation one = segment_runs(alt, Partition::trivial(3));
  CHECK(one.switches == 0);
  CHECK(one.tau == std::vector<int>{0});
  CHECK(one.run_index == std::vector<int>(len, 0));

  // Alternating blocks: a play of N states switches N-1 times.
  const RunSegmentation z = segment_runs(alt, Partition::singletons(3));
  CHECK(z.switches == len - 1);
  for (int n = 0; n < len; ++n) {
    CHECK(z.tau[n] == n);
    CHECK(z.run_index[n] == n);
  }

  // Absorption at stage m: one switch with boundary tau_1 = m+1.
  const StochasticGame g = big_match_game();
  StationaryProfile pr = uniform_profile(g);
  pr.strategies[0].prob[0] = {0.5, 0.5};
  pr.strategies[1].prob[0] = {1.0, 0.0};
  const PlayRecord play = simulate(g, as_automata(g, pr), 0, 50, 17);
  int m = 0;
  while (play.states[m + 1] == 0) ++m;
  const RunSegmentation seg = segment_runs(play, two);
  CHECK(seg.switches == 1);
  REQUIRE(seg.tau.size() == 2);
  CHECK(seg.tau[1] == m + 1);

  // Run lengths partition the play; run index is nondecreasing.
  int covered = 0;
  for (size_t k = 0; k < seg.tau.size(); ++k) {
    const int end = (k + 1 < seg.tau.size())
                        ? seg.tau[k + 1]
                        : static_cast<int>(play.states.size());
    covered += end - seg.tau[k];
  }
  CHECK(covered == static_cast<int>(play.states.size()));
  for (size_t n = 1; n < seg.run_index.size(); ++n)
    CHECK(seg.run_index[n] >= seg.run_index[n - 1]);
}

TEST_CASE("restart_wrapper leaves stationary strategies unchanged") {
  std::mt19937_64 rng(409);
  const StochasticGame g = sgtest::random_game(2, 3, 2, rng, 2.0);
  auto prof = as_automata(g, sgtest::random_profile(g, rng));
  const Partition part = Partition::from_blocks(3, {{0, 1}, {2}});
  auto wrapped = prof;
  for (auto& a : wrapped) a = restart_wrapper(a, part);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL})
    CHECK(plays_equal(simulate(g, prof, 0, 150, seed),
                      simulate(g, wrapped, 0, 150, seed)));
}

TEST_CASE("restart_wrapper resets memory on block entry") {
  const StochasticGame g = example2_game();
  const Partition part = Partition::singletons(2);
  const AutomatonStrategy counter = counter_automaton(g, 0, 10);
  const AutomatonStrategy wrapped = restart_wrapper(counter, part);
  const PlayRecord play = simulate(g, {wrapped}, 0, 30, 3);
  const RunSegmentation seg = segment_runs(play, part);
  const std::vector<int> mem = memory_trace(wrapped, play);
  // The counter never exceeds the number of stages since the run started.
  for (size_t n = 0; n < play.profiles.size(); ++n) {
    const int run_start = seg.tau[seg.run_index[n]];
    CHECK(mem[n] <= static_cast<int>(n) - run_start);
  }
  // Here every run has length 1, so the counter is pinned near 0.
  for (size_t n = 0; n < mem.size(); ++n) CHECK(mem[n] <= 1);
  // Unwrapped, the counter climbs to its cap.
  const std::vector<int> raw = memory_trace(counter, play);
  CHECK(raw.back() == 10);
}

TEST_CASE("restart_wrapper is idempotent") {
  std::mt19937_64 rng(419);
  const StochasticGame g = sgtest::random_game(2, 3, 2, rng, 2.0);
  const Partition part = Partition::from_blocks(3, {{0, 1}, {2}});
  const AutomatonStrategy counter = counter_automaton(g, 0, 6);
  const AutomatonStrategy once = restart_wrapper(counter, part);
  const AutomatonStrategy twice = restart_wrapper(once, part);
  // Behavioral equality along 1000 sampled histories: identical memory
  // traces, hence identical emissions.
  const AutomatonStrategy partner =
      as_automaton(g, uniform_strategy(g, 1));
  for (int j = 0; j < 1000; ++j) {
    const PlayRecord play =
        simulate(g, {once, partner}, 0, 12, split_seed(11, j));
    CHECK(memory_trace(once, play) == memory_trace(twice, play));
  }
}

TEST_CASE("run_length_constants") {
  CHECK(run_length_constants(0.5, 10, 1) == std::make_pair(40L, 160L));
  // Note: for every eps < 1 the strict ceiling gives M = ceil(2/eps) >= 3;
  // the value 2 is attained only at the excluded endpoint eps = 1.
  CHECK(run_length_constants(0.25, 3, 2) == std::make_pair(48L, 768L));
  // Doubling zeta doubles M.
  for (double eps : {0.1, 0.25, 0.5})
    for (long n : {1L, 7L, 20L}) {
      const auto base = run_length_constants(eps, n, 1);
      const auto twice = run_length_constants(eps, n, 2);
      CHECK(twice.first == 2 * base.first);
    }
  CHECK_THROWS(run_length_constants(0.0, 1, 1));
  CHECK_THROWS(run_length_constants(0.5, 0, 1));
}

TEST_CASE("coin_run_oracle identifies the initial-heads statistic") {
  // p = 0: no heads possible, the count is identically 0 = p/(1-p).
  const CoinRunReport zero = coin_run_oracle(0.0, 1000, 1);
  CHECK(zero.mean == 0.0);
  CHECK(zero.matches == "p/(1-p)");
  // The implementation counts initial heads, so p/(1-p) should match and
  // 1/(1-p) (off by one) should not at these sample sizes.
  for (double p : {0.5, 0.9}) {
    const CoinRunReport rep = coin_run_oracle(p, 100000, 2);
    CHECK(std::abs(rep.mean - rep.candidate_p_over) <= rep.ci99);
    CHECK(rep.matches == "p/(1-p)");
  }
  CHECK_THROWS(coin_run_oracle(1.0, 10, 1));
}

TEST_CASE("mc_discounted_payoff matches exact values within its CI") {
  // Deterministic: example 2 at lambda = 0.5 has value 6*0.5/1.5 = 2.
  const StochasticGame ex2 = example2_game();
  const McEstimate det = mc_discounted_payoff(
      ex2, as_automata(ex2, uniform_profile(ex2)), 0, 0.5, 200, 1);
  CHECK(std::abs(det.estimate[0] - 2.0) <= det.ci[0]);
  CHECK(det.ci[0] <= 1e-3);  // only the truncation tail remains

  // Random games against the exact occupation-measure payoff.
  std::mt19937_64 rng(431);
  for (int trial = 0; trial < 3; ++trial) {
    const StochasticGame g = sgtest::random_game(2, 3, 2, rng, 2.0);
    const StationaryProfile pr = sgtest::random_profile(g, rng);
    const std::vector<double> exact =
        discounted_payoff(g, occupation_stationary(g, 0, 0.9, pr));
    const McEstimate est =
        mc_discounted_payoff(g, as_automata(g, pr), 0, 0.9, 4000, 7 + trial);
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(est.estimate[i] - exact[i]) <= est.ci[i]);
  }
}

TEST_CASE("mc CI shrinks at the root-n rate") {
  std::mt19937_64 rng(433);
  const StochasticGame g = sgtest::random_game(2, 3, 2, rng, 2.0);
  const auto prof = as_automata(g, sgtest::random_profile(g, rng));
  double ratio_sum = 0.0;
  for (std::uint64_t rep = 0; rep < 3; ++rep) {
    const McEstimate small =
        mc_discounted_payoff(g, prof, 0, 0.9, 500, 50 + rep);
    const McEstimate big =
        mc_discounted_payoff(g, prof, 0, 0.9, 2000, 80 + rep);
    ratio_sum += big.ci[0] / small.ci[0];
  }
  // Quadrupling the sample should about halve the width on average.
  CHECK(ratio_sum / 3.0 <= 0.65);
}
