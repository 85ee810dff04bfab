#pragma once

#include "sgsolve/game.hpp"
#include "sgsolve/modified.hpp"

namespace sgsolve {

// Four-state single-player game whose modified best response depends on the
// initial state: s0 pays y and moves to s1; at s1, T pays 0 and absorbs into
// s2 (payoff 2) with probability p, B pays -1 and absorbs into s3 (payoff 3)
// with probability p.
StochasticGame example1_game(double y, double p);
// Partition {{s0,s1},{s2},{s3}} with cutoffs (0, 2, 3).
ModifiedSpec example1_spec(const StochasticGame& g, int s0, double lambda);

// Two-state single-player cycle: s0 pays 0 and moves to s1, s1 pays 6 and
// moves back; discounted value 6*lambda/(1+lambda).
StochasticGame example2_game();
// Partition {{s0},{s1}} with cutoff 4 on both blocks; modified value
// 4*lambda/(1+lambda).
ModifiedSpec example2_spec(const StochasticGame& g, int s0, double lambda);

// The Big Match variant: at s0, T absorbs (L into s2 paying (1,0), R into s1
// paying (0,1)) while B keeps the play at s0 with payoff (0,1) under L and
// (1,0) under R.
StochasticGame big_match_game();
// Player 1's partition into singletons with cutoffs (1/2, 0, 1) = his uniform
// values; player 2 is left unmodified (trivial partition, cutoff R).
ModifiedSpec big_match_spec(const StochasticGame& g, int s0, double lambda);

// Two-player four-state chain used by the uniform-equilibrium pipeline tests:
// three value blocks {s0}, {s1}, {s2,s3}; player 1 controls the exit from s0,
// player 2 the exit from s1, and {s2,s3} is a closed 2-cycle paying (1,1) and
// (3,3).
StochasticGame three_block_game();

// Single-player game whose middle block {d1,d2} exits to the absorbing state
// from two distinct states, so it is neither closed nor strongly
// controllable.
StochasticGame two_exit_game();

}  // namespace sgsolve
