#pragma once

#include <vector>

#include "sgsolve/game.hpp"

namespace sgsolve {

// Normalized discounted state-action time vector: entries[s][k] is the
// expected discounted share of stages spent in state s while playing action
// profile k, from initial state s0 at discount lambda.  Entries sum to 1 and
// satisfy the balance constraint
//   sum_a t(s,a) = (1-lambda) 1{s=s0} + lambda sum_{s',a'} t(s',a') q(s|s',a').
struct OccupationVector {
  double lambda = 0.0;
  int s0 = 0;
  std::vector<std::vector<double>> entries;  // [s][k]

  double state_total(int s) const;
  double total() const;
};

// Per-block discounted time and unnormalized payoff: U[i] is the discounted
// payoff player i collects while the play is in the block.
struct BlockBreakdown {
  std::vector<std::vector<int>> blocks;      // state index sets
  std::vector<double> time;                  // t(D) per block
  std::vector<std::vector<double>> payoff;   // U(D) per block, one per player
};

// Residuals of the two OccupationVector invariants (total mass and balance);
// used by tests and the internal >1e-6 sanity check.
double occupation_residual(const StochasticGame& g, const OccupationVector& t);

OccupationVector occupation_stationary(const StochasticGame& g, int s0,
                                       double lambda,
                                       const StationaryProfile& profile);

// Exact product-chain construction over joint memory x state.  Only the
// reachable part of the product is enumerated; throws when it exceeds cap.
OccupationVector occupation_automaton(
    const StochasticGame& g, int s0, double lambda,
    const std::vector<AutomatonStrategy>& profile, int cap = 1000000);

std::vector<double> discounted_payoff(const StochasticGame& g,
                                      const OccupationVector& occ);

// Exact N-stage average payoff by forward distribution pushing (no sampling).
std::vector<double> n_stage_payoff(const StochasticGame& g, int s0,
                                   const StationaryProfile& profile, int n);
std::vector<double> n_stage_payoff(const StochasticGame& g, int s0,
                                   const std::vector<AutomatonStrategy>& profile,
                                   int n, int cap = 1000000);

BlockBreakdown block_breakdown(const StochasticGame& g,
                               const OccupationVector& occ,
                               const std::vector<std::vector<int>>& blocks);

// Stationary strategy of player i that is discounted-equivalent to the
// strategy behind occ (other players folded into the kernel): the extraction
// x(s,a) = t(s,a)/t(s).  States with t(s) below threshold get the uniform
// default.
StationaryStrategy equivalent_stationary(const StochasticGame& g,
                                         const OccupationVector& occ,
                                         int player);

// Stationary strategy whose occupation vector is the alpha-mix of the
// occupation vectors of x and xp (single-controller use; player index given).
StationaryStrategy mixture_stationary(const StochasticGame& g, int s0,
                                      double lambda,
                                      const StationaryStrategy& x,
                                      const StationaryStrategy& xp,
                                      double alpha, int player = 0);

// Decomposition of the partial discounted sum sum_{n<=L} lambda^n x_n into a
// head term over the first M stages plus weighted running averages:
//   head = sum_{n<M} (lambda^n - lambda^M) x_n,
//   tail_l = ((L^l)+1)(lambda^l - lambda^{l+1}) * avg_{n<=L^l} x_n,  l=M..L,
// where L^l = min(L,l) and the final weight aggregates the constant tail
// l >= L in closed form.
struct AbelDecomposition {
  double head = 0.0;
  std::vector<double> tail_weights;   // weight per l = M..L
  std::vector<double> tail_averages;  // running average per l = M..L
  double reconstructed() const;
};

AbelDecomposition abel_decompose(const std::vector<double>& xs, double lambda,
                                 int m);

}  // namespace sgsolve
