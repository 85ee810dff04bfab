#pragma once

#include <utility>
#include <vector>

#include "sgsolve/game.hpp"
#include "sgsolve/modified.hpp"

namespace sgsolve {

// True iff no action profile can leave D: q(D|s,a) = 1 for every s in D and
// every profile a (exact support check, no tolerance).
bool is_closed(const StochasticGame& g, const std::vector<int>& set);

// A set is strongly controllable when every exiting (state, profile) pair
// shares one exit state s_D and one action ã of one player i_D; that player
// then decides unilaterally whether the play leaves the set.
struct ControlWitness {
  bool closed = false;      // no exiting pair at all
  bool found = false;       // witness below is valid
  int controller = -1;      // i_D
  int exit_state = -1;      // s_D
  int quit_action = -1;     // ã, action index of i_D at s_D
};

ControlWitness strongly_controllable_witness(const StochasticGame& g,
                                             const std::vector<int>& set);

// States from which the players, choosing profiles cooperatively, can reach
// the target with probability 1 without ever leaving `allowed` first.
// Purely graph-theoretic on transition supports.
std::vector<int> almost_sure_reach(const StochasticGame& g,
                                   const std::vector<int>& allowed,
                                   const std::vector<int>& target);

// Refines each block D of `base` into sibling classes: s and s' are siblings
// when each almost-surely reaches the other without leaving D.
Partition sibling_partition(const StochasticGame& g, const Partition& base);

struct BlockTag {
  enum Kind { kClosed, kControllable, kNeither };
  Kind kind = kNeither;
  ControlWitness witness;
};

struct ClassificationReport {
  Partition minmax_partition;   // states grouped by uniform min-max vectors
  Partition siblings;           // sibling refinement of the above
  std::vector<BlockTag> tags;   // one per sibling block
  bool strongly_controllable = false;
  // Cross-group state pairs whose value distance falls in (tol, 2 tol]:
  // candidates for silent misgrouping under the extrapolated values.
  std::vector<std::pair<int, int>> borderline;
};

// values[i][s] = player i's uniform min-max value at state s.
ClassificationReport classify(const StochasticGame& g,
                              const std::vector<std::vector<double>>& values,
                              double grouping_tol);

// Syntactic sufficient conditions under which the partition is known to be
// compatible with the modified-game limit theory: (1) the game is absorbing
// (at most one non-absorbing state), or (2) some block D has only absorbing
// states outside it and every other block is a singleton.
bool check_property_sufficient(const StochasticGame& g, const Partition& part);

}  // namespace sgsolve
