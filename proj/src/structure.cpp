#include "sgsolve/structure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgsolve {

namespace {

std::vector<bool> mask_of(const StochasticGame& g, const std::vector<int>& set,
                          const char* who) {
  std::vector<bool> in(g.num_states(), false);
  for (int s : set) {
    if (s < 0 || s >= g.num_states())
      throw std::invalid_argument(std::string(who) + ": unknown state index");
    in[s] = true;
  }
  return in;
}

bool profile_stays(const StochasticGame& g, const std::vector<bool>& in,
                   int s, int k) {
  for (int s2 = 0; s2 < g.num_states(); ++s2)
    if (!in[s2] && g.transition[s][k][s2] > 0.0) return false;
  return true;
}

bool state_absorbing(const StochasticGame& g, int s) {
  for (int k = 0; k < g.num_profiles(s); ++k)
    if (g.transition[s][k][s] != 1.0) return false;
  return true;
}

}  // namespace

bool is_closed(const StochasticGame& g, const std::vector<int>& set) {
  if (set.empty()) throw std::invalid_argument("is_closed: empty set");
  const std::vector<bool> in = mask_of(g, set, "is_closed");
  for (int s : set)
    for (int k = 0; k < g.num_profiles(s); ++k)
      if (!profile_stays(g, in, s, k)) return false;
  return true;
}

ControlWitness strongly_controllable_witness(const StochasticGame& g,
                                             const std::vector<int>& set) {
  if (set.empty())
    throw std::invalid_argument("strongly_controllable_witness: empty set");
  const std::vector<bool> in =
      mask_of(g, set, "strongly_controllable_witness");
  std::vector<std::pair<int, int>> exits;  // (state, profile)
  for (int s : set)
    for (int k = 0; k < g.num_profiles(s); ++k)
      if (!profile_stays(g, in, s, k)) exits.emplace_back(s, k);

  ControlWitness w;
  if (exits.empty()) {
    w.closed = true;
    return w;
  }
  const int sd = exits.front().first;
  for (const auto& e : exits)
    if (e.first != sd) return w;  // exits from two states: no witness
  // First (player, action) in canonical order shared by every exiting
  // profile.
  for (int i = 0; i < g.num_players(); ++i)
    for (int a = 0; a < g.num_actions(sd, i); ++a) {
      bool all = true;
      for (const auto& e : exits)
        if (g.profile_actions(sd, e.second)[i] != a) {
          all = false;
          break;
        }
      if (all) {
        w.found = true;
        w.controller = i;
        w.exit_state = sd;
        w.quit_action = a;
        return w;
      }
    }
  return w;
}

std::vector<int> almost_sure_reach(const StochasticGame& g,
                                   const std::vector<int>& allowed,
                                   const std::vector<int>& target) {
  const std::vector<bool> in_allowed = mask_of(g, allowed, "almost_sure_reach");
  std::vector<bool> is_target(g.num_states(), false);
  for (int t : target) {
    if (t < 0 || t >= g.num_states() || !in_allowed[t])
      throw std::invalid_argument(
          "almost_sure_reach: target must be inside allowed");
    is_target[t] = true;
  }

  // Iterated pruning: keep a state when it is a target, or it has a profile
  // whose support stays in the surviving set and it can reach a target
  // through such profiles.  Removal of a state can invalidate others, so
  // iterate to the fixpoint.
  std::vector<bool> live = in_allowed;
  bool changed = true;
  while (changed) {
    changed = false;
    // Backward reachability of targets through staying profiles.
    std::vector<bool> reach = is_target;
    bool grew = true;
    while (grew) {
      grew = false;
      for (int s = 0; s < g.num_states(); ++s) {
        if (!live[s] || reach[s] || is_target[s]) continue;
        for (int k = 0; k < g.num_profiles(s) && !reach[s]; ++k) {
          if (!profile_stays(g, live, s, k)) continue;
          for (int s2 = 0; s2 < g.num_states(); ++s2)
            if (g.transition[s][k][s2] > 0.0 && reach[s2]) {
              reach[s] = true;
              grew = true;
              break;
            }
        }
      }
    }
    for (int s = 0; s < g.num_states(); ++s)
      if (live[s] && !reach[s] && !is_target[s]) {
        live[s] = false;
        changed = true;
      }
  }
  std::vector<int> out;
  for (int s = 0; s < g.num_states(); ++s)
    if (live[s]) out.push_back(s);
  return out;
}

Partition sibling_partition(const StochasticGame& g, const Partition& base) {
  std::vector<std::vector<int>> blocks;
  for (const std::vector<int>& d : base.blocks) {
    // reach[j] = set of states of d that almost-surely reach d[j] inside d.
    std::vector<std::vector<bool>> mutual(d.size(),
                                          std::vector<bool>(d.size(), false));
    for (size_t j = 0; j < d.size(); ++j) {
      const std::vector<int> r = almost_sure_reach(g, d, {d[j]});
      for (size_t i = 0; i < d.size(); ++i)
        mutual[i][j] = std::find(r.begin(), r.end(), d[i]) != r.end();
    }
    std::vector<int> cls(d.size(), -1);
    for (size_t i = 0; i < d.size(); ++i) {
      if (cls[i] >= 0) continue;
      cls[i] = static_cast<int>(blocks.size());
      blocks.push_back({d[i]});
      for (size_t j = i + 1; j < d.size(); ++j)
        if (cls[j] < 0 && mutual[i][j] && mutual[j][i]) {
          cls[j] = cls[i];
          blocks[cls[i]].push_back(d[j]);
        }
    }
  }
  return Partition::from_blocks(g.num_states(), blocks);
}

ClassificationReport classify(const StochasticGame& g,
                              const std::vector<std::vector<double>>& values,
                              double grouping_tol) {
  const int ns = g.num_states();
  const auto value_dist = [&](int s, int s2) {
    double d = 0.0;
    for (const std::vector<double>& v : values)
      d = std::max(d, std::abs(v[s] - v[s2]));
    return d;
  };

  ClassificationReport rep;
  // Greedy grouping by value vectors, in state order: a state joins the
  // first group whose representative lies within the tolerance.
  std::vector<std::vector<int>> groups;
  for (int s = 0; s < ns; ++s) {
    bool placed = false;
    for (std::vector<int>& grp : groups)
      if (value_dist(s, grp.front()) <= grouping_tol) {
        grp.push_back(s);
        placed = true;
        break;
      }
    if (!placed) groups.push_back({s});
  }
  rep.minmax_partition = Partition::from_blocks(ns, groups);
  for (int s = 0; s < ns; ++s)
    for (int s2 = s + 1; s2 < ns; ++s2) {
      if (rep.minmax_partition.index[s] == rep.minmax_partition.index[s2])
        continue;
      const double d = value_dist(s, s2);
      if (d <= 2.0 * grouping_tol) rep.borderline.emplace_back(s, s2);
    }

  rep.siblings = sibling_partition(g, rep.minmax_partition);
  rep.strongly_controllable = true;
  for (const std::vector<int>& blk : rep.siblings.blocks) {
    BlockTag tag;
    tag.witness = strongly_controllable_witness(g, blk);
    if (tag.witness.closed)
      tag.kind = BlockTag::kClosed;
    else if (tag.witness.found)
      tag.kind = BlockTag::kControllable;
    else
      rep.strongly_controllable = false;
    rep.tags.push_back(tag);
  }
  return rep;
}

bool check_property_sufficient(const StochasticGame& g, const Partition& part) {
  std::vector<bool> absorbing(g.num_states());
  int non_absorbing = 0;
  for (int s = 0; s < g.num_states(); ++s) {
    absorbing[s] = state_absorbing(g, s);
    if (!absorbing[s]) ++non_absorbing;
  }
  if (non_absorbing <= 1) return true;  // absorbing game: any partition works
  for (int b = 0; b < part.num_blocks(); ++b) {
    bool ok = true;
    for (int b2 = 0; b2 < part.num_blocks() && ok; ++b2) {
      if (b2 == b) continue;
      if (part.blocks[b2].size() != 1 || !absorbing[part.blocks[b2].front()])
        ok = false;
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace sgsolve
