#include "sgsolve/game_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sgsolve {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("game json: " + what);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace

StochasticGame game_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("parse error: ") + e.what());
  }
  StochasticGame g;
  if (!j.contains("players") || !j["players"].is_array())
    fail("missing 'players' array");
  for (const auto& p : j["players"]) g.players.push_back(p.get<std::string>());
  if (!j.contains("states") || !j["states"].is_array())
    fail("missing 'states' array");
  for (const auto& st : j["states"]) {
    if (!st.contains("name")) fail("state entry missing 'name'");
    g.states.push_back(st["name"].get<std::string>());
    std::vector<std::vector<std::string>> acts;
    if (!st.contains("actions")) fail("state '" + g.states.back() + "' missing 'actions'");
    for (const std::string& pl : g.players) {
      if (!st["actions"].contains(pl))
        fail("state '" + g.states.back() + "' missing actions of player '" + pl + "'");
      std::vector<std::string> ids;
      for (const auto& a : st["actions"][pl]) ids.push_back(a.get<std::string>());
      if (ids.empty())
        fail("state '" + g.states.back() + "': empty action list for '" + pl + "'");
      acts.push_back(std::move(ids));
    }
    g.actions.push_back(std::move(acts));
  }
  if (!j.contains("payoffs")) fail("missing 'payoffs'");
  if (!j.contains("transitions")) fail("missing 'transitions'");
  g.payoff.resize(g.num_states());
  g.transition.resize(g.num_states());
  for (int s = 0; s < g.num_states(); ++s) {
    const std::string& sn = g.states[s];
    if (!j["payoffs"].contains(sn)) fail("payoffs missing state '" + sn + "'");
    if (!j["transitions"].contains(sn))
      fail("transitions missing state '" + sn + "'");
    const int nk = g.num_profiles(s);
    g.payoff[s].resize(nk);
    g.transition[s].resize(nk);
    for (int k = 0; k < nk; ++k) {
      const std::string key = g.profile_key(s, k);
      if (!j["payoffs"][sn].contains(key))
        fail("payoffs missing state '" + sn + "' profile '" + key + "'");
      std::vector<double> u;
      for (const auto& v : j["payoffs"][sn][key]) u.push_back(v.get<double>());
      if (static_cast<int>(u.size()) != g.num_players())
        fail("payoff vector length mismatch at '" + sn + "'/'" + key + "'");
      g.payoff[s][k] = std::move(u);
      if (!j["transitions"][sn].contains(key))
        fail("transitions missing state '" + sn + "' profile '" + key + "'");
      std::vector<double> row(g.num_states(), 0.0);
      double sum = 0.0;
      for (const auto& [dst, pv] : j["transitions"][sn][key].items()) {
        const int d = g.state_index(dst);
        if (d < 0) fail("unknown destination state '" + dst + "'");
        const double p = pv.get<double>();
        if (p < 0.0) fail("negative probability at '" + sn + "'/'" + key + "'");
        row[d] += p;
        sum += p;
      }
      if (std::fabs(sum - 1.0) > 1e-12)
        fail("row-sum " + std::to_string(sum) + " at '" + sn + "'/'" + key + "'");
      // One exact renormalization pass to absorb decimal round-off.
      if (sum > 0.0)
        for (double& p : row) p /= sum;
      g.transition[s][k] = std::move(row);
    }
  }
  g.payoff_bound = g.recompute_payoff_bound();
  return g;
}

StochasticGame load_game(const std::string& path) {
  return game_from_json_text(read_file(path));
}

std::string game_to_json_text(const StochasticGame& g) {
  ordered_json j;
  j["players"] = g.players;
  j["states"] = ordered_json::array();
  for (int s = 0; s < g.num_states(); ++s) {
    ordered_json st;
    st["name"] = g.states[s];
    ordered_json acts;
    for (int i = 0; i < g.num_players(); ++i)
      acts[g.players[i]] = g.actions[s][i];
    st["actions"] = acts;
    j["states"].push_back(st);
  }
  ordered_json pay, trans;
  for (int s = 0; s < g.num_states(); ++s) {
    ordered_json prow, trow;
    for (int k = 0; k < g.num_profiles(s); ++k) {
      const std::string key = g.profile_key(s, k);
      prow[key] = g.payoff[s][k];
      ordered_json dist;
      for (int s2 = 0; s2 < g.num_states(); ++s2)
        if (g.transition[s][k][s2] != 0.0)
          dist[g.states[s2]] = g.transition[s][k][s2];
      trow[key] = dist;
    }
    pay[g.states[s]] = prow;
    trans[g.states[s]] = trow;
  }
  j["payoffs"] = pay;
  j["transitions"] = trans;
  return j.dump(2) + "\n";
}

void save_game(const StochasticGame& g, const std::string& path) {
  write_file(path, game_to_json_text(g));
}

StationaryProfile profile_from_json_text(const StochasticGame& g,
                                         const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("profile parse error: ") + e.what());
  }
  StationaryProfile p;
  p.strategies.resize(g.num_players());
  for (int i = 0; i < g.num_players(); ++i) {
    StationaryStrategy& x = p.strategies[i];
    x.prob.resize(g.num_states());
    if (!j.contains(g.players[i]))
      fail("profile missing player '" + g.players[i] + "'");
    for (int s = 0; s < g.num_states(); ++s) {
      x.prob[s].assign(g.num_actions(s, i), 0.0);
      if (!j[g.players[i]].contains(g.states[s]))
        fail("profile missing state '" + g.states[s] + "' for player '" +
             g.players[i] + "'");
      double sum = 0.0;
      for (const auto& [aid, pv] : j[g.players[i]][g.states[s]].items()) {
        const int a = g.action_index(s, i, aid);
        if (a < 0) fail("unknown action '" + aid + "' at '" + g.states[s] + "'");
        x.prob[s][a] = pv.get<double>();
        sum += x.prob[s][a];
      }
      if (std::fabs(sum - 1.0) > 1e-12)
        fail("mixture at '" + g.states[s] + "' sums to " + std::to_string(sum));
      for (double& v : x.prob[s]) v /= sum;
    }
  }
  return p;
}

StationaryProfile load_profile(const StochasticGame& g,
                               const std::string& path) {
  return profile_from_json_text(g, read_file(path));
}

std::string profile_to_json_text(const StochasticGame& g,
                                 const StationaryProfile& p) {
  ordered_json j;
  for (int i = 0; i < g.num_players(); ++i) {
    ordered_json per_state;
    for (int s = 0; s < g.num_states(); ++s) {
      ordered_json mix;
      for (int a = 0; a < g.num_actions(s, i); ++a)
        if (p.strategies[i].prob[s][a] != 0.0)
          mix[g.actions[s][i][a]] = p.strategies[i].prob[s][a];
      per_state[g.states[s]] = mix;
    }
    j[g.players[i]] = per_state;
  }
  return j.dump(2) + "\n";
}

}  // namespace sgsolve
