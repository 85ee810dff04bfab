#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgsolve/game.hpp"
#include "sgsolve/modified.hpp"

namespace sgsolve {

// Deterministic stream splitting (splitmix64): every (seed, play, stage)
// triple yields an independent, portable 64-bit stream seed.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t play,
                         std::uint64_t stage = 0);

// Samples one play of `horizon` stages from s0 under the automaton profile.
// Bit-reproducible given the seed on every platform.
PlayRecord simulate(const StochasticGame& g,
                    const std::vector<AutomatonStrategy>& profile, int s0,
                    int horizon, std::uint64_t seed);

// D-runs of a play: tau[0]=0 and tau[k] for k>=1 are exactly the stages at
// which the play switches partition blocks; run_index[n] counts the runs
// started up to stage n; switches is the number of block changes.
struct RunSegmentation {
  std::vector<int> tau;
  std::vector<int> run_index;
  int switches = 0;
};

RunSegmentation segment_runs(const PlayRecord& play, const Partition& part);

// Block-Markovian wrapper: behaves like sigma inside a block and resets
// sigma's memory to its initial state whenever the play changes block, so the
// continuation depends only on play since the block entry.
AutomatonStrategy restart_wrapper(const AutomatonStrategy& sigma,
                                  const Partition& part);

// The run-length constants M = ceil(2*zeta*N/eps), L0 = ceil(2*zeta*M/eps).
std::pair<long, long> run_length_constants(double eps, long n, long zeta);

// Empirical mean of the number of initial heads of a p-coin, with a 99% CI,
// compared against the two candidate closed forms 1/(1-p) and p/(1-p).
struct CoinRunReport {
  double mean = 0.0;
  double ci99 = 0.0;
  double candidate_one_over = 0.0;   // 1/(1-p)
  double candidate_p_over = 0.0;     // p/(1-p)
  std::string matches;               // "1/(1-p)", "p/(1-p)", "both", "neither"
};

CoinRunReport coin_run_oracle(double p, int samples, std::uint64_t seed);

// Monte Carlo discounted payoff with a batch-means 99% CI; the truncation
// tail bound lambda^T * R is folded into the CI.
struct McEstimate {
  std::vector<double> estimate;  // per player
  std::vector<double> ci;        // per player, 99%
  int plays = 0;
  int horizon = 0;
};

McEstimate mc_discounted_payoff(const StochasticGame& g,
                                const std::vector<AutomatonStrategy>& profile,
                                int s0, double lambda, int plays,
                                std::uint64_t seed);

}  // namespace sgsolve
