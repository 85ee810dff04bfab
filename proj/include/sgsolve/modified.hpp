#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgsolve/game.hpp"
#include "sgsolve/occupancy.hpp"

namespace sgsolve {

// Disjoint cover of the state set.
struct Partition {
  std::vector<std::vector<int>> blocks;
  std::vector<int> index;  // state -> block

  static Partition from_blocks(int num_states,
                               const std::vector<std::vector<int>>& blocks);
  static Partition singletons(int num_states);
  static Partition trivial(int num_states);
  int num_blocks() const { return static_cast<int>(blocks.size()); }
};

// One cutoff per block of the paired partition.
using CutoffVector = std::vector<double>;

// The modified game specification: initial state, discount (per player;
// usually shared), and per player a partition with cutoffs.  The modified
// payoff caps each player's block payoff U(D) at t(D)*c(D):
//   gamma-hat_i = sum_D min{ U_i(D), t(D) * c_i(D) }.
// The unnormalized min form makes never-visited blocks contribute exactly 0,
// which is the 0/0 = 1 convention of the normalized definition.
struct ModifiedSpec {
  int s0 = 0;
  std::vector<double> lambdas;  // one per player
  std::vector<Partition> partitions;
  std::vector<CutoffVector> cutoffs;

  double lambda(int player) const { return lambdas[player]; }
  bool shared_lambda() const;
};

ModifiedSpec make_spec(const StochasticGame& g, int s0, double lambda,
                       const std::vector<Partition>& partitions,
                       const std::vector<CutoffVector>& cutoffs);

// Spec that leaves the game unmodified: trivial partition, cutoff +R.
ModifiedSpec unmodified_spec(const StochasticGame& g, int s0, double lambda);

// Modified payoff of player i given an occupation vector computed at the
// spec's (s0, lambda(i)).
double modified_payoff(const StochasticGame& g, const ModifiedSpec& spec,
                       const OccupationVector& occ, int player);

std::vector<double> modified_payoff_profile(const StochasticGame& g,
                                            const ModifiedSpec& spec,
                                            const StationaryProfile& profile);
std::vector<double> modified_payoff_profile(
    const StochasticGame& g, const ModifiedSpec& spec,
    const std::vector<AutomatonStrategy>& profile);

// Random-sample verifier of min{a1,b1} + min{a2,b2} <= min{a1+a2, b1+b2}.
bool check_min_superadditivity(int samples, std::uint64_t seed);

// JSON round-trip: {"s0":..., "lambda":..., "per_player":[{"partition":
// [[states]...], "cutoffs":[...]}]}.  "lambda" may be a number (shared) or an
// array with one entry per player.
ModifiedSpec spec_from_json_text(const StochasticGame& g,
                                 const std::string& text);
ModifiedSpec load_spec(const StochasticGame& g, const std::string& path);
std::string spec_to_json_text(const StochasticGame& g,
                              const ModifiedSpec& spec);

}  // namespace sgsolve
