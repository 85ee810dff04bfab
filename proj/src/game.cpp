#include "sgsolve/game.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgsolve {

int StochasticGame::num_profiles(int s) const {
  int n = 1;
  for (int i = 0; i < num_players(); ++i) n *= num_actions(s, i);
  return n;
}

std::vector<int> StochasticGame::profile_actions(int s, int k) const {
  const int np = num_players();
  std::vector<int> a(np, 0);
  for (int i = np - 1; i >= 0; --i) {
    const int ni = num_actions(s, i);
    a[i] = k % ni;
    k /= ni;
  }
  return a;
}

int StochasticGame::profile_index(int s, const std::vector<int>& a) const {
  int k = 0;
  for (int i = 0; i < num_players(); ++i) k = k * num_actions(s, i) + a[i];
  return k;
}

std::string StochasticGame::profile_key(int s, int k) const {
  const std::vector<int> a = profile_actions(s, k);
  std::string key;
  for (int i = 0; i < num_players(); ++i) {
    if (i > 0) key += '|';
    key += actions[s][i][a[i]];
  }
  return key;
}

int StochasticGame::state_index(const std::string& id) const {
  for (int s = 0; s < num_states(); ++s)
    if (states[s] == id) return s;
  return -1;
}

int StochasticGame::action_index(int s, int i, const std::string& id) const {
  for (int a = 0; a < num_actions(s, i); ++a)
    if (actions[s][i][a] == id) return a;
  return -1;
}

double StochasticGame::recompute_payoff_bound() const {
  double r = 0.0;
  for (int s = 0; s < num_states(); ++s)
    for (int k = 0; k < num_profiles(s); ++k)
      for (double u : payoff[s][k]) r = std::max(r, std::fabs(u));
  return r;
}

double StationaryProfile::profile_weight(const StochasticGame& g, int s,
                                         int k) const {
  const std::vector<int> a = g.profile_actions(s, k);
  double w = 1.0;
  for (int i = 0; i < g.num_players(); ++i) w *= strategies[i].prob[s][a[i]];
  return w;
}

namespace {

constexpr double kRowSumTol = 1e-12;

std::string describe(const StochasticGame& g, int s, int k) {
  return "state '" + g.states[s] + "' profile '" + g.profile_key(s, k) + "'";
}

}  // namespace

std::vector<std::string> validate(const StochasticGame& g) {
  std::vector<std::string> bad;
  if (g.players.empty()) bad.push_back("game has no players");
  if (g.states.empty()) bad.push_back("game has no states");
  if (static_cast<int>(g.actions.size()) != g.num_states() ||
      static_cast<int>(g.payoff.size()) != g.num_states() ||
      static_cast<int>(g.transition.size()) != g.num_states()) {
    bad.push_back("actions/payoff/transition tables not keyed by every state");
    return bad;
  }
  for (int s = 0; s < g.num_states(); ++s) {
    if (static_cast<int>(g.actions[s].size()) != g.num_players()) {
      bad.push_back("state '" + g.states[s] + "': action lists not per-player");
      continue;
    }
    for (int i = 0; i < g.num_players(); ++i) {
      if (g.actions[s][i].empty())
        bad.push_back("state '" + g.states[s] + "': empty action set for player '" +
                      g.players[i] + "'");
    }
    const int nk = g.num_profiles(s);
    if (static_cast<int>(g.payoff[s].size()) != nk)
      bad.push_back("state '" + g.states[s] + "': missing payoff rows");
    if (static_cast<int>(g.transition[s].size()) != nk)
      bad.push_back("state '" + g.states[s] + "': missing transition rows");
    for (int k = 0; k < nk; ++k) {
      if (k < static_cast<int>(g.payoff[s].size()) &&
          static_cast<int>(g.payoff[s][k].size()) != g.num_players())
        bad.push_back(describe(g, s, k) + ": payoff vector wrong length");
      if (k >= static_cast<int>(g.transition[s].size())) continue;
      const std::vector<double>& row = g.transition[s][k];
      if (static_cast<int>(row.size()) != g.num_states()) {
        bad.push_back(describe(g, s, k) + ": transition row wrong length");
        continue;
      }
      double sum = 0.0;
      bool neg = false;
      for (double p : row) {
        sum += p;
        neg = neg || p < 0.0;
      }
      if (neg) bad.push_back(describe(g, s, k) + ": negative transition entry");
      if (std::fabs(sum - 1.0) > kRowSumTol)
        bad.push_back(describe(g, s, k) + ": row-sum " + std::to_string(sum));
    }
  }
  const double r = g.recompute_payoff_bound();
  if (!std::isfinite(g.payoff_bound) || std::fabs(g.payoff_bound - r) > 1e-12)
    bad.push_back("payoff_bound " + std::to_string(g.payoff_bound) +
                  " does not equal max |payoff| " + std::to_string(r));
  return bad;
}

std::pair<std::vector<double>, std::vector<double>> mixed_extend(
    const StochasticGame& g, int s,
    const std::vector<std::vector<double>>& alpha) {
  if (static_cast<int>(alpha.size()) != g.num_players())
    throw std::invalid_argument("mixed_extend: one mixture per player required");
  for (int i = 0; i < g.num_players(); ++i) {
    if (static_cast<int>(alpha[i].size()) != g.num_actions(s, i))
      throw std::invalid_argument("mixed_extend: mixture of player '" +
                                  g.players[i] + "' has wrong support size");
    double mass = 0.0;
    for (const double p : alpha[i]) {
      if (p < 0.0)
        throw std::invalid_argument("mixed_extend: negative weight for '" +
                                    g.players[i] + "'");
      mass += p;
    }
    if (std::fabs(mass - 1.0) > 1e-12)
      throw std::invalid_argument("mixed_extend: mixture of player '" +
                                  g.players[i] + "' does not sum to 1");
  }
  std::vector<double> u(g.num_players(), 0.0);
  std::vector<double> q(g.num_states(), 0.0);
  for (int k = 0; k < g.num_profiles(s); ++k) {
    const std::vector<int> a = g.profile_actions(s, k);
    double w = 1.0;
    for (int i = 0; i < g.num_players(); ++i) w *= alpha[i][a[i]];
    if (w == 0.0) continue;
    for (int i = 0; i < g.num_players(); ++i) u[i] += w * g.payoff[s][k][i];
    for (int s2 = 0; s2 < g.num_states(); ++s2)
      q[s2] += w * g.transition[s][k][s2];
  }
  return {u, q};
}

AutomatonStrategy as_automaton(const StochasticGame& g,
                               const StationaryStrategy& x) {
  AutomatonStrategy a;
  a.memory = 1;
  a.initial = 0;
  a.emit = {x.prob};
  a.update = [](int, int, int, int) { return 0; };
  return a;
}

StationaryStrategy uniform_strategy(const StochasticGame& g, int i) {
  StationaryStrategy x;
  x.prob.resize(g.num_states());
  for (int s = 0; s < g.num_states(); ++s)
    x.prob[s].assign(g.num_actions(s, i), 1.0 / g.num_actions(s, i));
  return x;
}

StationaryProfile uniform_profile(const StochasticGame& g) {
  StationaryProfile p;
  for (int i = 0; i < g.num_players(); ++i)
    p.strategies.push_back(uniform_strategy(g, i));
  return p;
}

StationaryStrategy pure_strategy(const StochasticGame& g, int i,
                                 const std::vector<int>& action_per_state) {
  StationaryStrategy x;
  x.prob.resize(g.num_states());
  for (int s = 0; s < g.num_states(); ++s) {
    x.prob[s].assign(g.num_actions(s, i), 0.0);
    x.prob[s][action_per_state[s]] = 1.0;
  }
  return x;
}

}  // namespace sgsolve
