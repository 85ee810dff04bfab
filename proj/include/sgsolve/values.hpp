#pragma once

#include <cstdint>
#include <vector>

#include "sgsolve/game.hpp"
#include "sgsolve/modified.hpp"
#include "sgsolve/occupancy.hpp"

namespace sgsolve {

enum class ValueKind { kMinmax, kMaxmin };

// Discounted zero-sum value of player i against the coordinated adversary
// (all opponents folded into one player whose action set is the product of
// theirs), computed by Shapley iteration with matrix-game LPs.  `own` is
// player i's optimal stationary strategy; `adversary[s]` is the minimizing
// mixture over the opponents' joint actions at s.
struct ValueReport {
  double lambda = 0.0;
  std::vector<double> value;  // per state
  int iterations = 0;
  double residual = 0.0;
  StationaryStrategy own;
  std::vector<std::vector<double>> adversary;
};

ValueReport discounted_minmax(const StochasticGame& g, int player,
                              double lambda, double tol = 1e-9);
ValueReport discounted_maxmin(const StochasticGame& g, int player,
                              double lambda, double tol = 1e-9);

// Limit of the discounted value as lambda -> 1, estimated per state by a
// least-squares fit of c0 + c1*sqrt(1-lambda) + c2*(1-lambda) over the grid.
// When the fit residual exceeds 1e-2 * payoff_bound the last grid value is
// reported instead and the state is flagged.
struct UniformValueEstimate {
  std::vector<double> limit;               // per state
  std::vector<double> fit_residual;        // per state (rms)
  std::vector<bool> fallback;              // per state
  std::vector<double> grid;                // lambdas used, increasing
  std::vector<std::vector<double>> table;  // [grid point][state]
};

std::vector<double> default_lambda_grid();

UniformValueEstimate uniform_value(const StochasticGame& g, int player,
                                   ValueKind kind,
                                   std::vector<double> grid = {});

// Exact best response of player i in the modified game against fixed
// stationary opponents, as an LP over the occupation polytope of the induced
// MDP: maximize sum_D z_D subject to z_D <= U_D(t), z_D <= c(D) t(D) and the
// balance constraints on t.  The strategy is recovered from the optimal t by
// conditional-probability extraction.
struct BestResponse {
  StationaryStrategy strategy;
  double value = 0.0;
};

BestResponse modified_best_response(const StochasticGame& g,
                                    const ModifiedSpec& spec, int player,
                                    const StationaryProfile& opponents);

// Stationary equilibrium of the modified game by damped best-response
// iteration with multistart, certified a posteriori by per-player LP
// best-response gaps.
struct EquilibriumResult {
  StationaryProfile profile;
  std::vector<double> payoffs;  // modified payoff per player
  std::vector<double> gaps;     // LP best-response gap per player
  int restarts_used = 0;
  bool certified = false;
};

EquilibriumResult stationary_equilibrium(const StochasticGame& g,
                                         const ModifiedSpec& spec, double eps,
                                         int restarts = 20,
                                         std::uint64_t seed = 1,
                                         const StationaryProfile* warm_start =
                                             nullptr);

// Warm-started continuation of stationary_equilibrium along an increasing
// lambda grid; the spec's partitions and cutoffs are reused at every point.
std::vector<EquilibriumResult> trace_equilibria(const StochasticGame& g,
                                                const ModifiedSpec& spec,
                                                const std::vector<double>& grid,
                                                double eps,
                                                int restarts = 20,
                                                std::uint64_t seed = 1);

// Heuristic outer search result: the inner problem is solved exactly (LP or
// pure-profile enumeration), the outer one by multistart pattern search.
struct StatSearchResult {
  double value = 0.0;
  StationaryProfile profile;  // outer argopt with the inner answer filled in
  int evaluations = 0;
  bool heuristic = true;
};

// Stationary min-max of player i in the modified game: exact inner max via
// modified_best_response, outer min over the opponents' product stationary
// strategies by pattern search seeded with all pure profiles and the
// discounted_minmax adversary marginals.
StatSearchResult modified_minmax_stat(const StochasticGame& g,
                                      const ModifiedSpec& spec, int player,
                                      int budget = 400);

// Stationary max-min of player i in the modified game: inner min over the
// opponents' PURE stationary profiles (exact for fixed own strategy), outer
// max over player i's stationary strategies by multistart pattern search with
// a final fine refinement pass.
StatSearchResult modified_maxmin_stat(const StochasticGame& g,
                                      const ModifiedSpec& spec, int player,
                                      int budget = 40000);

}  // namespace sgsolve
