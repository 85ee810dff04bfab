#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgsolve/game.hpp"
#include "sgsolve/modified.hpp"
#include "sgsolve/structure.hpp"
#include "sgsolve/values.hpp"

namespace sgsolve {

// The game with every state outside `block` made absorbing at a constant
// payoff equal to the supplied per-player value vector.
struct RestrictedGame {
  StochasticGame game;
  std::vector<int> block;
};

// values[i][s] = player i's uniform min-max value at state s.
RestrictedGame restrict_game(const StochasticGame& g,
                             const std::vector<int>& block,
                             const std::vector<std::vector<double>>& values);

// The block's modified-game spec: partition {block} + outside singletons,
// cutoffs c_i(block) = values[i][s_D] and c_i({s}) = values[i][s], with the
// spec's initial state at the block's exit state s_D (any block state when
// the block is closed).  Throws when the block is neither closed nor
// strongly controllable.
ModifiedSpec step1_spec(const StochasticGame& g, const std::vector<int>& block,
                        const std::vector<std::vector<double>>& values);

// Which of the two long-run alternatives the block's traced equilibria
// select: the play asymptotically stays inside the block (a1) or leaves it
// with the exit continuation worth at least the in-block value (a2, recorded
// with the inequality normalized by the mass outside the block).
struct DichotomyResult {
  std::vector<int> block;
  bool a1 = false;
  double t1 = 0.0;  // extrapolated limit of the in-block discounted time
  std::vector<double> grid;
  std::vector<double> time_table;                 // t_lambda(block) per point
  std::vector<std::vector<double>> payoff_table;  // [point][player], in-block
                                                  // payoff per unit time
  std::vector<double> limit_payoff;               // per player
  bool condition_ok = false;  // the selected branch's inequality within tol
  StationaryProfile x1;       // limit profile estimate (last grid point)
  std::vector<EquilibriumResult> trace;
};

DichotomyResult dichotomy(const StochasticGame& restricted,
                          const ModifiedSpec& spec,
                          const std::vector<int>& block,
                          std::vector<double> grid = {}, double eps = 1e-4,
                          double branch_tol = 1e-3,
                          std::uint64_t seed = 1);

// Recurrent classes of the chain induced by x1 that lie inside the block,
// with their discounted-time weights at the evaluation point.
struct IrreducibleClasses {
  std::vector<std::vector<int>> classes;
  std::vector<double> beta;
};

IrreducibleClasses irreducible_sets(const StochasticGame& g,
                                    const std::vector<int>& block,
                                    const StationaryProfile& x1, int s0,
                                    double lambda = 1.0 - 1.0 / 2048.0);

// The in-block cycling profile: travel to each recurrent class in turn via a
// small perturbation of x1, dwell there for ceil(beta*K) stages playing x1,
// then move on.  All players share one public memory layout.
std::vector<AutomatonStrategy> build_sigma_K(const StochasticGame& g,
                                             const std::vector<int>& block,
                                             const IrreducibleClasses& cls,
                                             const StationaryProfile& x1,
                                             double delta, int K);

// The exit profile of a strongly controllable block: reach s_D by a pure
// attractor profile, play the block equilibrium there with the controller
// mixing eta of the quit action in, and give up (labeled memory state) after
// ceil(1/eta^2) visits.
std::vector<AutomatonStrategy> build_exit_strategy(
    const StochasticGame& g, const std::vector<int>& block,
    const ControlWitness& witness, const StationaryProfile& x_lambda0,
    double eta, double delta);

struct BlockArtifact {
  enum Kind { kCycle, kExit };
  Kind kind = kCycle;
  std::vector<int> block;
  std::vector<AutomatonStrategy> automata;  // one per player, shared memory
  ControlWitness witness;
  StationaryProfile honest;  // block equilibrium behind the automata
};

struct SigmaStar {
  std::vector<AutomatonStrategy> profile;
  Partition blocks;
  long memory_bound = 0;
  std::vector<std::string> notes;  // attached monitors, constants
};

// Glues the per-block automata behind a dispatcher that switches (and
// resets) the block-local automaton whenever the play enters a new block.
// When an opponent of a block's controller has a profitable stationary
// deviation inside the block, the controller's quit-action probability is
// re-indexed by a public drift counter: the counter tracks the opponent
// action whose exit continuation favors the deviator (the action against
// which quitting backfires), and the quit probability decays geometrically
// in the counter.  Sustained play of that action therefore meets only a
// bounded total quit hazard, while any return to the profitable flow action
// exposes the deviator to the punishing exit at a fixed hazard ratio.
// values[i][s] = player i's uniform min-max value, used to orient the
// counter.
SigmaStar assemble_sigma_star(const StochasticGame& g, const Partition& dstar,
                              const std::vector<BlockArtifact>& artifacts,
                              int s0, double eps,
                              const std::vector<std::vector<double>>& values);

struct DeviationProbe {
  std::string kind;  // "one-shot", "automaton", "markov-best-response"
  int player = -1;
  double gain = 0.0;
};

struct UniformEqReport {
  bool pass = false;
  // payoff[idx][i]: honest payoff of player i at evaluation point idx
  // (horizons then lambdas, in order).
  std::vector<std::string> point_names;
  std::vector<std::vector<double>> payoff;
  std::vector<std::vector<double>> floor_margin;  // payoff - (vbar - 3 eps)
  double max_gain = 0.0;
  DeviationProbe worst;
  std::vector<DeviationProbe> probes;
};

UniformEqReport verify_uniform_eq(const StochasticGame& g,
                                  const SigmaStar& sigma, int s0, double eps,
                                  const std::vector<std::vector<double>>& values,
                                  std::vector<int> horizons = {1000, 10000},
                                  std::vector<double> lambdas = {0.99, 0.999},
                                  int deviation_budget = 40,
                                  std::uint64_t seed = 1);

// End-to-end pipeline: uniform values, classification, per-block dichotomy
// and construction, assembly.  Throws when the game is not strongly
// controllable.
struct PipelineResult {
  std::vector<std::vector<double>> values;  // uniform min-max per player
  ClassificationReport classification;
  std::vector<DichotomyResult> dichotomies;  // per sibling block
  SigmaStar sigma;
};

PipelineResult build_uniform_equilibrium(const StochasticGame& g, int s0,
                                         double eps, std::uint64_t seed = 1);

}  // namespace sgsolve
