#include "sgsolve/examples.hpp"

namespace sgsolve {

namespace {

std::vector<double> delta(int n, int at, double mass = 1.0) {
  std::vector<double> d(n, 0.0);
  d[at] = mass;
  return d;
}

}  // namespace

StochasticGame example1_game(double y, double p) {
  StochasticGame g;
  g.players = {"p1"};
  g.states = {"s0", "s1", "s2", "s3"};
  g.actions = {{{"w"}}, {{"T", "B"}}, {{"w"}}, {{"w"}}};
  g.payoff = {{{y}}, {{0.0}, {-1.0}}, {{2.0}}, {{3.0}}};
  g.transition.resize(4);
  g.transition[0] = {delta(4, 1)};
  g.transition[1].resize(2);
  g.transition[1][0] = {0.0, 1.0 - p, p, 0.0};  // T absorbs into s2
  g.transition[1][1] = {0.0, 1.0 - p, 0.0, p};  // B absorbs into s3
  g.transition[2] = {delta(4, 2)};
  g.transition[3] = {delta(4, 3)};
  g.payoff_bound = g.recompute_payoff_bound();
  return g;
}

ModifiedSpec example1_spec(const StochasticGame& g, int s0, double lambda) {
  const Partition part = Partition::from_blocks(4, {{0, 1}, {2}, {3}});
  return make_spec(g, s0, lambda, {part}, {{0.0, 2.0, 3.0}});
}

StochasticGame example2_game() {
  StochasticGame g;
  g.players = {"p1"};
  g.states = {"s0", "s1"};
  g.actions = {{{"w"}}, {{"w"}}};
  g.payoff = {{{0.0}}, {{6.0}}};
  g.transition = {{delta(2, 1)}, {delta(2, 0)}};
  g.payoff_bound = 6.0;
  return g;
}

ModifiedSpec example2_spec(const StochasticGame& g, int s0, double lambda) {
  const Partition part = Partition::singletons(2);
  return make_spec(g, s0, lambda, {part}, {{4.0, 4.0}});
}

StochasticGame big_match_game() {
  StochasticGame g;
  g.players = {"p1", "p2"};
  g.states = {"s0", "s1", "s2"};
  g.actions = {{{"T", "B"}, {"L", "R"}}, {{"B"}, {"L"}}, {{"B"}, {"L"}}};
  // Profiles at s0 in order T|L, T|R, B|L, B|R.
  g.payoff = {{{0.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}},
              {{0.0, 1.0}},
              {{1.0, 0.0}}};
  g.transition.resize(3);
  g.transition[0] = {delta(3, 2), delta(3, 1), delta(3, 0), delta(3, 0)};
  g.transition[1] = {delta(3, 1)};
  g.transition[2] = {delta(3, 2)};
  g.payoff_bound = 1.0;
  return g;
}

ModifiedSpec big_match_spec(const StochasticGame& g, int s0, double lambda) {
  const Partition singles = Partition::singletons(3);
  const Partition triv = Partition::trivial(3);
  return make_spec(g, s0, lambda, {singles, triv},
                   {{0.5, 0.0, 1.0}, {g.payoff_bound}});
}

StochasticGame three_block_game() {
  StochasticGame g;
  g.players = {"p1", "p2"};
  g.states = {"s0", "s1", "s2", "s3"};
  g.actions = {{{"stay", "go"}, {"w"}},
               {{"w"}, {"stay", "go"}},
               {{"w"}, {"w"}},
               {{"w"}, {"w"}}};
  g.payoff = {{{0.0, 0.0}, {0.0, 0.0}},
              {{1.0, 0.0}, {1.0, 0.0}},
              {{1.0, 1.0}},
              {{3.0, 3.0}}};
  g.transition.resize(4);
  g.transition[0] = {delta(4, 0), delta(4, 1)};
  g.transition[1] = {delta(4, 1), delta(4, 2)};
  g.transition[2] = {delta(4, 3)};
  g.transition[3] = {delta(4, 2)};
  g.payoff_bound = 3.0;
  return g;
}

StochasticGame two_exit_game() {
  StochasticGame g;
  g.players = {"p1"};
  g.states = {"d1", "d2", "e"};
  g.actions = {{{"next", "out"}}, {{"next", "out"}}, {{"w"}}};
  g.payoff = {{{0.0}, {0.0}}, {{0.0}, {0.0}}, {{1.0}}};
  g.transition.resize(3);
  g.transition[0] = {delta(3, 1), delta(3, 2)};
  g.transition[1] = {delta(3, 0), delta(3, 2)};
  g.transition[2] = {delta(3, 2)};
  g.payoff_bound = 1.0;
  return g;
}

}  // namespace sgsolve
