#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgsolve {

// Finite multiplayer stochastic game: a state set, per-(state,player) action
// sets, stage payoffs and a transition kernel, both indexed by joint action
// profiles.  Action profiles at a state are enumerated in mixed-radix order
// with player 0 most significant, so profile k at state s decodes to one
// action index per player via profile_actions(s, k).
struct StochasticGame {
  std::vector<std::string> players;
  std::vector<std::string> states;
  // actions[s][i] = ordered action ids of player i at state s (nonempty).
  std::vector<std::vector<std::vector<std::string>>> actions;
  // payoff[s][k][i] = stage payoff of player i at state s under profile k.
  std::vector<std::vector<std::vector<double>>> payoff;
  // transition[s][k][s2] = probability of moving to s2 from s under profile k.
  std::vector<std::vector<std::vector<double>>> transition;
  // Max absolute stage payoff; every theory tolerance scales with this bound.
  double payoff_bound = 0.0;

  int num_players() const { return static_cast<int>(players.size()); }
  int num_states() const { return static_cast<int>(states.size()); }
  int num_actions(int s, int i) const {
    return static_cast<int>(actions[s][i].size());
  }
  int num_profiles(int s) const;
  std::vector<int> profile_actions(int s, int k) const;
  int profile_index(int s, const std::vector<int>& a) const;
  // Canonical string key "a1|a2|..." for an action profile.
  std::string profile_key(int s, int k) const;

  int state_index(const std::string& id) const;   // -1 when unknown
  int action_index(int s, int i, const std::string& id) const;  // -1 unknown

  double recompute_payoff_bound() const;
};

// Mixed action of one player at each state.
struct StationaryStrategy {
  // prob[s][a] = probability of action a at state s.
  std::vector<std::vector<double>> prob;
};

// One stationary strategy per player.
struct StationaryProfile {
  std::vector<StationaryStrategy> strategies;

  // Joint probability of action profile k at state s.
  double profile_weight(const StochasticGame& g, int s, int k) const;
};

// Finite-memory behavior strategy of one player: a memory set with an initial
// element, a mixed action per (memory, state), and a deterministic memory
// update fed by the public history (current state, realized action profile,
// next state).
struct AutomatonStrategy {
  int memory = 1;
  int initial = 0;
  // emit[m][s] = mixed action over the player's actions at s.
  std::vector<std::vector<std::vector<double>>> emit;
  // (memory, state, profile, next state) -> next memory.
  std::function<int(int, int, int, int)> update;
  // Optional human-readable label per memory state (e.g. punishment
  // triggers); empty when unused.
  std::vector<std::string> labels;
};

// A realized play: state/profile sequence plus per-stage payoff vectors.
struct PlayRecord {
  std::vector<int> states;    // s_0 ... s_N
  std::vector<int> profiles;  // a_0 ... a_{N-1}
  std::vector<std::vector<double>> payoffs;  // u(s_n, a_n), one per stage
};

// Returns a list of human-readable violations; empty iff the game satisfies
// every structural invariant (row sums, nonnegativity, table completeness,
// payoff bound correctness).  Never throws.
std::vector<std::string> validate(const StochasticGame& g);

// Multilinear extension: expected payoff vector and expected transition
// distribution at state s when each player i mixes according to alpha[i].
// Throws std::invalid_argument on malformed mixtures.
std::pair<std::vector<double>, std::vector<double>> mixed_extend(
    const StochasticGame& g, int s,
    const std::vector<std::vector<double>>& alpha);

// Wraps a stationary strategy of player i as a singleton-memory automaton.
AutomatonStrategy as_automaton(const StochasticGame& g,
                               const StationaryStrategy& x);

// Uniform mixed action at every state for player i.
StationaryStrategy uniform_strategy(const StochasticGame& g, int i);
StationaryProfile uniform_profile(const StochasticGame& g);

// Pure stationary strategy: one fixed action index per state.
StationaryStrategy pure_strategy(const StochasticGame& g, int i,
                                 const std::vector<int>& action_per_state);

}  // namespace sgsolve
