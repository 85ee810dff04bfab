#include "sgsolve/uniform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "sgsolve/occupancy.hpp"
#include "sgsolve/simulate.hpp"

namespace sgsolve {

namespace {

// Drift-monitor constants (see assemble_sigma_star): the controller's quit
// probability at the exit state is f(c) = kMonitorPeak * kMonitorDecay^c,
// where c walks up on the monitored opponent's tempting action and down
// otherwise, clamped to [0, kMonitorLeft + kMonitorRight].
constexpr int kMonitorLeft = 14;
constexpr int kMonitorRight = 46;
constexpr double kMonitorPeak = 0.12;
constexpr double kMonitorDecay = 0.85;
constexpr int kMonitorSpan = kMonitorLeft + kMonitorRight + 1;

std::vector<bool> block_mask(const StochasticGame& g,
                             const std::vector<int>& block) {
  std::vector<bool> in(g.num_states(), false);
  for (int s : block) {
    if (s < 0 || s >= g.num_states())
      throw std::invalid_argument("unknown state index in block");
    in[s] = true;
  }
  return in;
}

// Chain induced by a stationary profile: kernel[s][s2].
std::vector<std::vector<double>> induced_chain(const StochasticGame& g,
                                               const StationaryProfile& x) {
  std::vector<std::vector<double>> p(
      g.num_states(), std::vector<double>(g.num_states(), 0.0));
  for (int s = 0; s < g.num_states(); ++s)
    for (int k = 0; k < g.num_profiles(s); ++k) {
      const double w = x.profile_weight(g, s, k);
      if (w == 0.0) continue;
      for (int s2 = 0; s2 < g.num_states(); ++s2)
        p[s][s2] += w * g.transition[s][k][s2];
    }
  return p;
}

// Strongly connected components (Kosaraju) of the support graph of `p`;
// returns component index per state, components numbered arbitrarily.
std::vector<int> scc_of(const std::vector<std::vector<double>>& p) {
  const int n = static_cast<int>(p.size());
  std::vector<int> order;
  std::vector<bool> seen(n, false);
  std::function<void(int)> dfs1 = [&](int s) {
    seen[s] = true;
    for (int s2 = 0; s2 < n; ++s2)
      if (p[s][s2] > 0.0 && !seen[s2]) dfs1(s2);
    order.push_back(s);
  };
  for (int s = 0; s < n; ++s)
    if (!seen[s]) dfs1(s);
  std::vector<int> comp(n, -1);
  int nc = 0;
  std::function<void(int)> dfs2 = [&](int s) {
    comp[s] = nc;
    for (int s2 = 0; s2 < n; ++s2)
      if (p[s2][s] > 0.0 && comp[s2] < 0) dfs2(s2);
  };
  for (int i = n - 1; i >= 0; --i)
    if (comp[order[i]] < 0) {
      dfs2(order[i]);
      ++nc;
    }
  return comp;
}

// Pure attractor profile: action profile per state in `region` that stays in
// `region` and moves the play toward `target` with positive probability;
// states in `target` get profile 0.  Throws if some region state has none.
std::vector<int> attractor_profile(const StochasticGame& g,
                                   const std::vector<int>& region,
                                   const std::vector<int>& target) {
  const std::vector<bool> in = block_mask(g, region);
  std::vector<int> choice(g.num_states(), -1);
  std::vector<bool> done(g.num_states(), false);
  for (int t : target) {
    done[t] = true;
    choice[t] = 0;
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (int s : region) {
      if (done[s]) continue;
      for (int k = 0; k < g.num_profiles(s); ++k) {
        bool stays = true, progress = false;
        for (int s2 = 0; s2 < g.num_states(); ++s2) {
          if (g.transition[s][k][s2] <= 0.0) continue;
          if (!in[s2]) {
            stays = false;
            break;
          }
          if (done[s2]) progress = true;
        }
        if (stays && progress) {
          choice[s] = k;
          done[s] = true;
          grew = true;
          break;
        }
      }
    }
  }
  for (int s : region)
    if (!done[s])
      throw std::runtime_error(
          "no in-block profile reaches the target from every block state");
  return choice;
}

// Verifies that the chain of `x` reaches `target` almost surely from every
// state of `region`: every recurrent class reachable from the region must
// intersect the target.
bool chain_reaches(const StochasticGame& g, const StationaryProfile& x,
                   const std::vector<int>& region,
                   const std::vector<int>& target) {
  const auto p = induced_chain(g, x);
  const int n = g.num_states();
  std::vector<bool> reach(n, false);
  std::vector<int> stack = region;
  for (int s : region) reach[s] = true;
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (int s2 = 0; s2 < n; ++s2)
      if (p[s][s2] > 0.0 && !reach[s2]) {
        reach[s2] = true;
        stack.push_back(s2);
      }
  }
  // A reachable state is pre-target if some path leads to the target.
  std::vector<bool> pre(n, false);
  for (int t : target) pre[t] = true;
  bool grew = true;
  while (grew) {
    grew = false;
    for (int s = 0; s < n; ++s) {
      if (pre[s] || !reach[s]) continue;
      for (int s2 = 0; s2 < n; ++s2)
        if (p[s][s2] > 0.0 && pre[s2]) {
          pre[s] = true;
          grew = true;
          break;
        }
    }
  }
  // Almost-sure reach fails iff some reachable state can dodge into a
  // closed set of non-pre-target states; equivalently some reachable state
  // is not pre-target (from there the target is unreachable).
  for (int s = 0; s < n; ++s)
    if (reach[s] && !pre[s]) return false;
  return true;
}

std::vector<double> puiseux_limit(const std::vector<double>& grid,
                                  const std::vector<double>& ys) {
  const int n = static_cast<int>(grid.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n);
  for (int k = 0; k < n; ++k) {
    a(k, 0) = 1.0;
    a(k, 1) = std::sqrt(1.0 - grid[k]);
    a(k, 2) = 1.0 - grid[k];
    y(k) = ys[k];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
  const double res = std::sqrt((a * c - y).squaredNorm() / n);
  return {c(0), res};
}

}  // namespace

RestrictedGame restrict_game(const StochasticGame& g,
                             const std::vector<int>& block,
                             const std::vector<std::vector<double>>& values) {
  if (static_cast<int>(values.size()) != g.num_players())
    throw std::invalid_argument("restrict_game: one value vector per player");
  const std::vector<bool> in = block_mask(g, block);
  RestrictedGame r;
  r.game = g;
  r.block = block;
  for (int s = 0; s < g.num_states(); ++s) {
    if (in[s]) continue;
    for (int k = 0; k < g.num_profiles(s); ++k) {
      for (int i = 0; i < g.num_players(); ++i)
        r.game.payoff[s][k][i] = values[i][s];
      r.game.transition[s][k].assign(g.num_states(), 0.0);
      r.game.transition[s][k][s] = 1.0;
    }
  }
  r.game.payoff_bound = r.game.recompute_payoff_bound();
  return r;
}

ModifiedSpec step1_spec(const StochasticGame& g, const std::vector<int>& block,
                        const std::vector<std::vector<double>>& values) {
  const ControlWitness w = strongly_controllable_witness(g, block);
  if (!w.closed && !w.found)
    throw std::invalid_argument(
        "step1_spec: block neither closed nor strongly controllable");
  const int sd = w.closed ? block.front() : w.exit_state;
  const std::vector<bool> in = block_mask(g, block);
  std::vector<std::vector<int>> blocks;
  blocks.push_back(block);
  for (int s = 0; s < g.num_states(); ++s)
    if (!in[s]) blocks.push_back({s});
  const Partition part = Partition::from_blocks(g.num_states(), blocks);
  std::vector<CutoffVector> cutoffs(g.num_players());
  for (int i = 0; i < g.num_players(); ++i) {
    cutoffs[i].push_back(values[i][sd]);
    for (int s = 0; s < g.num_states(); ++s)
      if (!in[s]) cutoffs[i].push_back(values[i][s]);
  }
  return make_spec(g, sd, 0.5,
                   std::vector<Partition>(g.num_players(), part), cutoffs);
}

DichotomyResult dichotomy(const StochasticGame& restricted,
                          const ModifiedSpec& spec,
                          const std::vector<int>& block,
                          std::vector<double> grid, double eps,
                          double branch_tol, std::uint64_t seed) {
  if (grid.empty()) grid = default_lambda_grid();
  DichotomyResult out;
  out.block = block;
  out.grid = grid;
  out.trace = trace_equilibria(restricted, spec, grid, eps, 4, seed);

  const int np = restricted.num_players();
  std::vector<std::vector<int>> cover = {block};
  {
    const std::vector<bool> in = block_mask(restricted, block);
    for (int s = 0; s < restricted.num_states(); ++s)
      if (!in[s]) cover.push_back({s});
  }
  for (size_t k = 0; k < grid.size(); ++k) {
    const OccupationVector occ = occupation_stationary(
        restricted, spec.s0, grid[k], out.trace[k].profile);
    const BlockBreakdown bb = block_breakdown(restricted, occ, cover);
    out.time_table.push_back(bb.time[0]);
    std::vector<double> per(np, 0.0);
    for (int i = 0; i < np; ++i)
      per[i] = bb.time[0] > 1e-12 ? bb.payoff[0][i] / bb.time[0] : 0.0;
    out.payoff_table.push_back(per);
  }
  out.t1 = std::clamp(puiseux_limit(grid, out.time_table)[0], 0.0, 1.0);
  out.a1 = out.t1 >= 1.0 - branch_tol;
  out.x1 = out.trace.back().profile;

  const double tol = 1e-2 * std::max(restricted.payoff_bound, 1.0);
  out.limit_payoff.assign(np, 0.0);
  for (int i = 0; i < np; ++i) {
    std::vector<double> col;
    for (const auto& row : out.payoff_table) col.push_back(row[i]);
    out.limit_payoff[i] = puiseux_limit(grid, col)[0];
  }
  if (out.a1) {
    // Each player's limit in-block payoff covers the block's cutoff.
    out.condition_ok = true;
    for (int i = 0; i < np; ++i)
      if (out.limit_payoff[i] < spec.cutoffs[i][0] - tol)
        out.condition_ok = false;
  } else {
    // Exit-value inequality, normalized by the mass outside the block: the
    // discounted time outside, weighted by the outside values, covers
    // (1 - t(block)) times the block value.
    const OccupationVector occ = occupation_stationary(
        restricted, spec.s0, grid.back(), out.trace.back().profile);
    out.condition_ok = true;
    for (int i = 0; i < np; ++i) {
      const Partition& part = spec.partitions[i];
      double outside = 0.0, mass = 0.0;
      for (int s = 0; s < restricted.num_states(); ++s) {
        if (part.index[s] == 0) continue;  // the block itself
        const double t = occ.state_total(s);
        outside += t * spec.cutoffs[i][part.index[s]];
        mass += t;
      }
      (void)mass;
      if (outside < (1.0 - out.time_table.back()) * spec.cutoffs[i][0] - tol)
        out.condition_ok = false;
    }
  }
  return out;
}

IrreducibleClasses irreducible_sets(const StochasticGame& g,
                                    const std::vector<int>& block,
                                    const StationaryProfile& x1, int s0,
                                    double lambda) {
  const auto p = induced_chain(g, x1);
  const std::vector<int> comp = scc_of(p);
  const int n = g.num_states();
  int nc = 0;
  for (int s = 0; s < n; ++s) nc = std::max(nc, comp[s] + 1);
  std::vector<bool> recurrent(nc, true);
  for (int s = 0; s < n; ++s)
    for (int s2 = 0; s2 < n; ++s2)
      if (p[s][s2] > 0.0 && comp[s2] != comp[s]) recurrent[comp[s]] = false;
  const std::vector<bool> in = block_mask(g, block);

  IrreducibleClasses out;
  std::vector<int> class_id(nc, -1);
  for (int c = 0; c < nc; ++c) {
    if (!recurrent[c]) continue;
    std::vector<int> members;
    bool inside = true;
    for (int s = 0; s < n; ++s)
      if (comp[s] == c) {
        members.push_back(s);
        if (!in[s]) inside = false;
      }
    if (!inside) continue;
    class_id[c] = static_cast<int>(out.classes.size());
    out.classes.push_back(members);
  }
  const OccupationVector occ = occupation_stationary(g, s0, lambda, x1);
  out.beta.assign(out.classes.size(), 0.0);
  for (size_t c = 0; c < out.classes.size(); ++c)
    for (int s : out.classes[c]) out.beta[c] += occ.state_total(s);
  double total = 0.0;
  for (double b : out.beta) total += b;
  if (total > 1.0 + 1e-6)
    throw std::runtime_error("irreducible_sets: class weights exceed 1");
  return out;
}

namespace {
bool in_class_l(const IrreducibleClasses& cls, int l, int s) {
  for (int t : cls.classes[l])
    if (t == s) return true;
  return false;
}
}  // namespace

std::vector<AutomatonStrategy> build_sigma_K(const StochasticGame& g,
                                             const std::vector<int>& block,
                                             const IrreducibleClasses& cls,
                                             const StationaryProfile& x1,
                                             double delta, int K) {
  if (cls.classes.empty())
    throw std::invalid_argument("build_sigma_K: no irreducible classes");
  const int np = g.num_players();
  const int nl = static_cast<int>(cls.classes.size());

  // Travel mixtures: (1-delta) x1 + delta * pure attractor toward class l.
  std::vector<StationaryProfile> travel(nl, x1);
  for (int l = 0; l < nl; ++l) {
    const std::vector<int> reach =
        almost_sure_reach(g, block, cls.classes[l]);
    if (reach.size() < block.size())
      throw std::runtime_error(
          "build_sigma_K: no perturbation reaches the class from the whole "
          "block");
    const std::vector<int> pure = attractor_profile(g, block, cls.classes[l]);
    for (int s : block) {
      // Only travel states are perturbed; inside the class the chain already
      // arrived and plays x1 (the class is closed under x1).
      if (in_class_l(cls, l, s)) continue;
      const std::vector<int> acts = g.profile_actions(s, pure[s]);
      for (int i = 0; i < np; ++i) {
        std::vector<double>& e = travel[l].strategies[i].prob[s];
        for (double& v : e) v *= (1.0 - delta);
        e[acts[i]] += delta;
      }
    }
    if (!chain_reaches(g, travel[l], block, cls.classes[l]))
      throw std::runtime_error(
          "build_sigma_K: perturbed profile misses the class");
  }

  std::vector<int> dwell(nl);
  std::vector<int> offset(nl);  // memory id of travel state of phase l
  int memory = 0;
  for (int l = 0; l < nl; ++l) {
    dwell[l] = std::max(1, static_cast<int>(std::ceil(cls.beta[l] * K)));
    offset[l] = memory;
    memory += 1 + dwell[l];
  }

  std::vector<std::string> labels(memory);
  for (int l = 0; l < nl; ++l) {
    labels[offset[l]] = "travel-" + std::to_string(l);
    for (int c = 0; c < dwell[l]; ++c)
      labels[offset[l] + 1 + c] =
          "dwell-" + std::to_string(l) + "-" + std::to_string(c);
  }

  std::vector<std::vector<bool>> in_class(nl,
                                          std::vector<bool>(g.num_states()));
  for (int l = 0; l < nl; ++l) {
    std::fill(in_class[l].begin(), in_class[l].end(), false);
    for (int s : cls.classes[l]) in_class[l][s] = true;
  }
  const auto update = [offset, dwell, in_class, nl](int m, int /*s*/,
                                                    int /*k*/, int s2) {
    int l = nl - 1;
    while (l > 0 && m < offset[l]) --l;
    if (m == offset[l]) return in_class[l][s2] ? offset[l] + 1 : m;
    const int c = m - offset[l] - 1;
    if (c + 1 < dwell[l]) return m + 1;
    return offset[(l + 1) % nl];
  };

  std::vector<AutomatonStrategy> out(np);
  for (int i = 0; i < np; ++i) {
    AutomatonStrategy& a = out[i];
    a.memory = memory;
    a.initial = offset[0];
    a.labels = labels;
    a.update = update;
    a.emit.assign(memory, std::vector<std::vector<double>>(g.num_states()));
    for (int m = 0; m < memory; ++m) {
      int l = nl - 1;
      while (l > 0 && m < offset[l]) --l;
      const bool traveling = m == offset[l];
      for (int s = 0; s < g.num_states(); ++s)
        a.emit[m][s] = traveling ? travel[l].strategies[i].prob[s]
                                 : x1.strategies[i].prob[s];
    }
  }
  return out;
}

std::vector<AutomatonStrategy> build_exit_strategy(
    const StochasticGame& g, const std::vector<int>& block,
    const ControlWitness& witness, const StationaryProfile& x_lambda0,
    double eta, double delta) {
  (void)delta;
  if (!witness.found)
    throw std::invalid_argument(
        "build_exit_strategy: block has no control witness");
  if (eta <= 0.0 || eta > 1.0)
    throw std::invalid_argument("build_exit_strategy: eta in (0,1]");
  const int np = g.num_players();
  const int sd = witness.exit_state;
  const int visits = static_cast<int>(std::ceil(1.0 / (eta * eta)));

  const std::vector<int> pure = attractor_profile(g, block, {sd});

  // The controller's perturbed mixture at the exit state: the block
  // equilibrium itself, with an extra eta of the quit action mixed in, so
  // every visit exits with probability at least eta.
  std::vector<double> hat =
      x_lambda0.strategies[witness.controller].prob[sd];
  for (double& v : hat) v *= (1.0 - eta);
  hat[witness.quit_action] += eta;

  const int memory = visits + 1;
  const auto update = [sd, visits](int m, int s, int /*k*/, int /*s2*/) {
    return (s == sd && m < visits) ? m + 1 : m;
  };
  std::vector<std::string> labels(memory);
  for (int m = 0; m < visits; ++m)
    labels[m] = "exit-visit-" + std::to_string(m);
  labels[visits] = "give-up";

  std::vector<AutomatonStrategy> out(np);
  const std::vector<bool> in = block_mask(g, block);
  for (int i = 0; i < np; ++i) {
    AutomatonStrategy& a = out[i];
    a.memory = memory;
    a.initial = 0;
    a.labels = labels;
    a.update = update;
    a.emit.assign(memory, std::vector<std::vector<double>>(g.num_states()));
    for (int m = 0; m < memory; ++m)
      for (int s = 0; s < g.num_states(); ++s) {
        if (!in[s] || m == visits) {
          a.emit[m][s] = x_lambda0.strategies[i].prob[s];
        } else if (s != sd) {
          std::vector<double> e(g.num_actions(s, i), 0.0);
          e[g.profile_actions(s, pure[s])[i]] = 1.0;
          a.emit[m][s] = e;
        } else if (i != witness.controller) {
          a.emit[m][s] = x_lambda0.strategies[i].prob[s];
        } else {
          a.emit[m][s] = hat;
        }
      }
  }
  return out;
}

namespace {

struct Monitor {
  int block = -1;       // dstar block index
  int controller = -1;  // i_D, whose quit probability is re-indexed
  int watched = -1;     // the monitored opponent
  int exit_state = -1;
  int quit_action = -1;
  int tempting = -1;    // the opponent's action driving the counter up
};

// Builds the assembled per-player automata given optional monitors.
std::vector<AutomatonStrategy> assemble_profile(
    const StochasticGame& g, const Partition& dstar,
    const std::vector<BlockArtifact>& arts, int s0,
    const std::vector<Monitor>& monitors, long* memory_bound) {
  const int np = g.num_players();
  const int nb = dstar.num_blocks();
  std::vector<const Monitor*> mon_of(nb, nullptr);
  for (const Monitor& m : monitors) mon_of[m.block] = &m;

  // A monitored block's quit schedule supersedes its local exit protocol, so
  // its local memory collapses to a single state; this keeps the reachable
  // part of the product chain small.
  int lmax = 1;
  for (int b = 0; b < nb; ++b)
    if (!mon_of[b])
      lmax = std::max(lmax, arts[b].automata.front().memory);
  const long total = static_cast<long>(nb) * lmax * kMonitorSpan;
  if (memory_bound) *memory_bound = total;

  const auto encode = [lmax](int b, int m, int c) {
    return (b * lmax + m) * kMonitorSpan + c;
  };
  std::vector<std::function<int(int, int, int, int)>> local_update(nb);
  std::vector<int> local_initial(nb);
  for (int b = 0; b < nb; ++b) {
    if (mon_of[b]) {
      local_update[b] = [](int, int, int, int) { return 0; };
      local_initial[b] = 0;
    } else {
      local_update[b] = arts[b].automata.front().update;
      local_initial[b] = arts[b].automata.front().initial;
    }
  }
  const std::vector<int> index = dstar.index;

  // Everything the dispatcher needs is captured by value so the returned
  // update functions do not dangle: per block, the monitored exit state (-1
  // when unmonitored) and, per profile there, whether the watched player took
  // the tempting action.
  std::vector<int> mon_state(nb, -1);
  std::vector<std::vector<bool>> mon_up(nb);
  for (const Monitor& m : monitors) {
    mon_state[m.block] = m.exit_state;
    const int sd = m.exit_state;
    mon_up[m.block].assign(g.num_profiles(sd), false);
    for (int k = 0; k < g.num_profiles(sd); ++k)
      mon_up[m.block][k] = g.profile_actions(sd, k)[m.watched] == m.tempting;
  }
  const auto real_update = [encode, lmax, local_update, local_initial, index,
                            mon_state, mon_up](int mem, int s, int k, int s2) {
    const int c = mem % kMonitorSpan;
    const int bm = mem / kMonitorSpan;
    const int m = bm % lmax;
    const int b = bm / lmax;
    if (index[s2] != b)
      return encode(index[s2], local_initial[index[s2]], kMonitorLeft);
    int c2 = c;
    if (s == mon_state[b])
      c2 = mon_up[b][k] ? std::min(c + 1, kMonitorSpan - 1)
                        : std::max(c - 1, 0);
    return encode(b, local_update[b](m, s, k, s2), c2);
  };

  std::vector<AutomatonStrategy> out(np);
  for (int i = 0; i < np; ++i) {
    AutomatonStrategy& a = out[i];
    a.memory = static_cast<int>(total);
    a.initial = encode(index[s0], local_initial[index[s0]], kMonitorLeft);
    a.update = real_update;
    a.emit.assign(a.memory, std::vector<std::vector<double>>(g.num_states()));
    for (int b = 0; b < nb; ++b)
      for (int m = 0; m < lmax; ++m)
        for (int c = 0; c < kMonitorSpan; ++c) {
          const int mem = encode(b, m, c);
          const int ml = std::min(m, arts[b].automata[i].memory - 1);
          for (int s = 0; s < g.num_states(); ++s) {
            std::vector<double> e = arts[b].automata[i].emit[ml][s];
            if (mon_of[b] && i == mon_of[b]->controller &&
                s == mon_of[b]->exit_state) {
              // Monitored quit schedule: quit with probability f(c), and
              // spread the rest over the honest non-quit mixture.
              const double f =
                  kMonitorPeak * std::pow(kMonitorDecay, c);
              std::vector<double> hat =
                  arts[b].honest.strategies[i].prob[s];
              double other = 0.0;
              for (int x = 0; x < static_cast<int>(hat.size()); ++x)
                if (x != mon_of[b]->quit_action) other += hat[x];
              if (other > 1e-12)
                for (int x = 0; x < static_cast<int>(hat.size()); ++x)
                  hat[x] = x == mon_of[b]->quit_action ? 0.0 : hat[x] / other;
              else {
                std::fill(hat.begin(), hat.end(), 0.0);
                hat[mon_of[b]->quit_action] = 1.0;
              }
              for (double& v : hat) v *= (1.0 - f);
              hat[mon_of[b]->quit_action] += f;
              e = hat;
            }
            a.emit[mem][s] = e;
          }
        }
  }
  return out;
}

}  // namespace

SigmaStar assemble_sigma_star(const StochasticGame& g, const Partition& dstar,
                              const std::vector<BlockArtifact>& artifacts,
                              int s0, double eps,
                              const std::vector<std::vector<double>>& values) {
  const int nb = dstar.num_blocks();
  std::vector<BlockArtifact> arts(nb);
  std::vector<bool> filled(nb, false);
  for (const BlockArtifact& a : artifacts) {
    std::vector<int> sorted = a.block;
    std::sort(sorted.begin(), sorted.end());
    bool placed = false;
    for (int b = 0; b < nb; ++b) {
      std::vector<int> blk = dstar.blocks[b];
      std::sort(blk.begin(), blk.end());
      if (blk == sorted) {
        arts[b] = a;
        filled[b] = true;
        placed = true;
        break;
      }
    }
    if (!placed)
      throw std::invalid_argument(
          "assemble_sigma_star: artifact block not in the partition");
  }
  for (int b = 0; b < nb; ++b)
    if (!filled[b])
      throw std::invalid_argument(
          "assemble_sigma_star: missing artifact for a block");

  SigmaStar star;
  star.blocks = dstar;
  const double gain_tol = 0.5 * eps * std::max(g.payoff_bound, 1e-12);

  // First pass without monitors; probe each controllable block's opponents
  // for profitable pure deviations at the exit state.
  std::vector<AutomatonStrategy> plain =
      assemble_profile(g, dstar, arts, s0, {}, nullptr);
  std::vector<Monitor> monitors;
  const double probe_lambda = 0.99;
  std::vector<double> honest = discounted_payoff(
      g, occupation_automaton(g, s0, probe_lambda, plain));
  for (int b = 0; b < nb; ++b) {
    if (!arts[b].witness.found) continue;
    const int sd = arts[b].witness.exit_state;
    Monitor best;
    double best_gain = gain_tol;
    for (int j = 0; j < g.num_players(); ++j) {
      if (j == arts[b].witness.controller) continue;
      if (g.num_actions(sd, j) < 2) continue;
      for (int act = 0; act < g.num_actions(sd, j); ++act) {
        std::vector<AutomatonStrategy> dev = plain;
        for (auto& row : dev[j].emit) {
          row[sd].assign(g.num_actions(sd, j), 0.0);
          row[sd][act] = 1.0;
        }
        const double gain =
            discounted_payoff(g,
                              occupation_automaton(g, s0, probe_lambda, dev))
                [j] -
            honest[j];
        if (gain > best_gain) {
          best_gain = gain;
          best.block = b;
          best.controller = arts[b].witness.controller;
          best.watched = j;
          best.exit_state = sd;
          best.quit_action = arts[b].witness.quit_action;
        }
      }
    }
    if (best.block >= 0) {
      // The counter tracks the watched player's action under which the quit
      // action's exit continuation is best for them (quitting backfires
      // there), not the flow-profitable action found above: expected
      // continuation value under (quit, act, others honest).
      const int j = best.watched;
      double best_w = -1e300;
      for (int act = 0; act < g.num_actions(sd, j); ++act) {
        double w = 0.0, mass = 0.0;
        for (int k = 0; k < g.num_profiles(sd); ++k) {
          const std::vector<int> acts = g.profile_actions(sd, k);
          if (acts[j] != act) continue;
          if (acts[best.controller] != best.quit_action) continue;
          double wk = 1.0;
          for (int i = 0; i < g.num_players(); ++i)
            if (i != j && i != best.controller)
              wk *= arts[b].honest.strategies[i].prob[sd][acts[i]];
          if (wk == 0.0) continue;
          mass += wk;
          for (int s2 = 0; s2 < g.num_states(); ++s2) {
            const double q = g.transition[sd][k][s2];
            if (q == 0.0) continue;
            const int ref = dstar.index[s2] == b ? sd : s2;
            w += wk * q * values[j][ref];
          }
        }
        if (mass > 0.0) w /= mass;
        if (w > best_w) {
          best_w = w;
          best.tempting = act;
        }
      }
      monitors.push_back(best);
      std::ostringstream note;
      note << "monitor on block " << b << ": player "
           << g.players[best.watched] << " action "
           << g.actions[sd][best.watched][best.tempting] << " at "
           << g.states[sd] << " re-indexes " << g.players[best.controller]
           << "'s quit probability (peak " << kMonitorPeak << ", decay "
           << kMonitorDecay << ")";
      star.notes.push_back(note.str());
    }
  }

  star.profile =
      assemble_profile(g, dstar, arts, s0, monitors, &star.memory_bound);
  return star;
}

namespace {

struct Evaluation {
  std::vector<std::string> names;
  std::vector<std::vector<double>> payoff;  // [point][player]
};

Evaluation evaluate_profile(const StochasticGame& g,
                            const std::vector<AutomatonStrategy>& profile,
                            int s0, const std::vector<int>& horizons,
                            const std::vector<double>& lambdas) {
  Evaluation ev;
  for (int n : horizons) {
    ev.names.push_back("N=" + std::to_string(n));
    ev.payoff.push_back(n_stage_payoff(g, s0, profile, n));
  }
  for (double l : lambdas) {
    std::ostringstream name;
    name << "lambda=" << l;
    ev.names.push_back(name.str());
    ev.payoff.push_back(
        discounted_payoff(g, occupation_automaton(g, s0, l, profile)));
  }
  return ev;
}

// Exact best response of one player against the others' automata: the
// environment is the finite chain over (others' joint memory, state).  The
// deviator observes it (public history), so this dominates every stationary
// deviation.
struct DeviatorMdp {
  struct Node {
    std::vector<int> mems;  // others' memories (deviator slot unused)
    int state = 0;
  };
  std::vector<Node> nodes;
  // arms[node][own action] = (reward, transition over nodes)
  std::vector<std::vector<double>> reward;
  std::vector<std::vector<std::vector<std::pair<int, double>>>> next;
  int start = 0;
};

DeviatorMdp build_deviator_mdp(const StochasticGame& g,
                               const std::vector<AutomatonStrategy>& profile,
                               int player, int s0, int cap = 200000) {
  const int np = g.num_players();
  DeviatorMdp mdp;
  std::map<std::pair<std::vector<int>, int>, int> id;
  std::vector<DeviatorMdp::Node> queue;
  DeviatorMdp::Node start;
  start.mems.resize(np, 0);
  for (int i = 0; i < np; ++i)
    start.mems[i] = i == player ? 0 : profile[i].initial;
  start.state = s0;
  id[{start.mems, start.state}] = 0;
  mdp.nodes.push_back(start);
  for (size_t head = 0; head < mdp.nodes.size(); ++head) {
    const DeviatorMdp::Node node = mdp.nodes[head];
    const int s = node.state;
    const int na = g.num_actions(s, player);
    if (head == 0) {
      mdp.reward.clear();
      mdp.next.clear();
    }
    mdp.reward.resize(mdp.nodes.size());
    mdp.next.resize(mdp.nodes.size());
    mdp.reward[head].assign(na, 0.0);
    mdp.next[head].assign(na, {});
    for (int a = 0; a < na; ++a) {
      std::map<int, double> dist;
      for (int k = 0; k < g.num_profiles(s); ++k) {
        const std::vector<int> acts = g.profile_actions(s, k);
        if (acts[player] != a) continue;
        double w = 1.0;
        for (int i = 0; i < np; ++i)
          if (i != player) w *= profile[i].emit[node.mems[i]][s][acts[i]];
        if (w == 0.0) continue;
        mdp.reward[head][a] += w * g.payoff[s][k][player];
        for (int s2 = 0; s2 < g.num_states(); ++s2) {
          const double q = g.transition[s][k][s2];
          if (q == 0.0) continue;
          DeviatorMdp::Node nxt;
          nxt.mems.resize(np, 0);
          for (int i = 0; i < np; ++i)
            nxt.mems[i] =
                i == player ? 0 : profile[i].update(node.mems[i], s, k, s2);
          nxt.state = s2;
          auto it = id.find({nxt.mems, nxt.state});
          int nid;
          if (it == id.end()) {
            nid = static_cast<int>(mdp.nodes.size());
            if (nid >= cap)
              throw std::runtime_error("deviator MDP exceeds node cap");
            id[{nxt.mems, nxt.state}] = nid;
            mdp.nodes.push_back(nxt);
          } else {
            nid = it->second;
          }
          dist[nid] += w * q;
        }
      }
      for (const auto& [nid, pr] : dist) mdp.next[head][a].push_back({nid, pr});
      dist.clear();
    }
  }
  mdp.start = 0;
  return mdp;
}

double deviator_value_discounted(const DeviatorMdp& mdp, double lambda,
                                 double bound) {
  const int n = static_cast<int>(mdp.nodes.size());
  std::vector<double> v(n, 0.0), nv(n, 0.0);
  const double target = 1e-8 * std::max(bound, 1e-12) *
                        (lambda > 0 ? (1.0 - lambda) / (2.0 * lambda) : 1.0);
  for (int iter = 0; iter < 10000000; ++iter) {
    double res = 0.0;
    for (int u = 0; u < n; ++u) {
      double best = -1e300;
      for (size_t a = 0; a < mdp.reward[u].size(); ++a) {
        double q = (1.0 - lambda) * mdp.reward[u][a];
        for (const auto& [nid, pr] : mdp.next[u][a]) q += lambda * pr * v[nid];
        best = std::max(best, q);
      }
      nv[u] = best;
      res = std::max(res, std::abs(nv[u] - v[u]));
    }
    v.swap(nv);
    if (res <= target) break;
  }
  return v[mdp.start];
}

double deviator_value_nstage(const DeviatorMdp& mdp, int horizon) {
  const int n = static_cast<int>(mdp.nodes.size());
  std::vector<double> v(n, 0.0), nv(n, 0.0);
  for (int t = 0; t < horizon; ++t) {
    for (int u = 0; u < n; ++u) {
      double best = -1e300;
      for (size_t a = 0; a < mdp.reward[u].size(); ++a) {
        double q = mdp.reward[u][a];
        for (const auto& [nid, pr] : mdp.next[u][a]) q += pr * v[nid];
        best = std::max(best, q);
      }
      nv[u] = best;
    }
    v.swap(nv);
  }
  return v[mdp.start] / horizon;
}

AutomatonStrategy one_shot_deviation(const AutomatonStrategy& base,
                                     int target_state, int action,
                                     int num_actions) {
  AutomatonStrategy out;
  const int inner = base.memory;
  out.memory = 2 * inner;
  out.initial = base.initial;  // flag 0 = deviation still pending
  out.emit.assign(out.memory, {});
  for (int flag = 0; flag < 2; ++flag)
    for (int m = 0; m < inner; ++m) {
      out.emit[flag * inner + m] = base.emit[m];
      if (flag == 0) {
        std::vector<double> pure(num_actions, 0.0);
        pure[action] = 1.0;
        out.emit[flag * inner + m][target_state] = pure;
      }
    }
  const auto inner_update = base.update;
  out.update = [inner_update, inner, target_state](int m, int s, int k,
                                                   int s2) {
    const int flag = m / inner;
    const int base_m = inner_update(m % inner, s, k, s2);
    const int nflag = (flag == 1 || s == target_state) ? 1 : 0;
    return nflag * inner + base_m;
  };
  return out;
}

AutomatonStrategy random_automaton(const StochasticGame& g, int player,
                                   std::mt19937_64& rng) {
  std::uniform_int_distribution<int> mem_d(1, 3);
  std::exponential_distribution<double> ex(1.0);
  AutomatonStrategy a;
  a.memory = mem_d(rng);
  a.initial = 0;
  a.emit.assign(a.memory, std::vector<std::vector<double>>(g.num_states()));
  for (int m = 0; m < a.memory; ++m)
    for (int s = 0; s < g.num_states(); ++s) {
      const int na = g.num_actions(s, player);
      std::vector<double> e(na);
      double tot = 0.0;
      for (int x = 0; x < na; ++x) tot += (e[x] = ex(rng) + 1e-9);
      for (double& v : e) v /= tot;
      a.emit[m][s] = e;
    }
  const std::uint64_t key = rng();
  const int memory = a.memory;
  a.update = [key, memory](int m, int s, int k, int s2) {
    std::uint64_t h = key;
    h ^= split_seed(h, static_cast<std::uint64_t>(m) * 1000003ULL + s,
                    static_cast<std::uint64_t>(k) * 7919ULL + s2);
    return static_cast<int>(h % static_cast<std::uint64_t>(memory));
  };
  return a;
}

}  // namespace

UniformEqReport verify_uniform_eq(const StochasticGame& g,
                                  const SigmaStar& sigma, int s0, double eps,
                                  const std::vector<std::vector<double>>& values,
                                  std::vector<int> horizons,
                                  std::vector<double> lambdas,
                                  int deviation_budget, std::uint64_t seed) {
  const int np = g.num_players();
  const double r = std::max(g.payoff_bound, 1e-12);
  UniformEqReport rep;

  const Evaluation honest =
      evaluate_profile(g, sigma.profile, s0, horizons, lambdas);
  rep.point_names = honest.names;
  rep.payoff = honest.payoff;
  bool floors_ok = true;
  for (size_t p = 0; p < honest.payoff.size(); ++p) {
    std::vector<double> margin(np);
    for (int i = 0; i < np; ++i) {
      margin[i] = honest.payoff[p][i] - (values[i][s0] - 3.0 * eps * r);
      if (margin[i] < 0.0) floors_ok = false;
    }
    rep.floor_margin.push_back(margin);
  }

  const auto record_gain = [&](const std::string& kind, int player,
                               double gain) {
    DeviationProbe probe{kind, player, gain};
    rep.probes.push_back(probe);
    if (gain > rep.max_gain) {
      rep.max_gain = gain;
      rep.worst = probe;
    }
  };
  const auto probe_profile = [&](const std::string& kind, int player,
                                 const AutomatonStrategy& dev) {
    std::vector<AutomatonStrategy> prof = sigma.profile;
    prof[player] = dev;
    const Evaluation ev = evaluate_profile(g, prof, s0, horizons, lambdas);
    double gain = -1e300;
    for (size_t p = 0; p < ev.payoff.size(); ++p)
      gain = std::max(gain, ev.payoff[p][player] - honest.payoff[p][player]);
    record_gain(kind, player, gain);
  };

  // (a) One-shot deviations at the first visit of each state.
  for (int i = 0; i < np; ++i)
    for (int s = 0; s < g.num_states(); ++s)
      for (int a = 0; a < g.num_actions(s, i); ++a)
        probe_profile("one-shot", i,
                      one_shot_deviation(sigma.profile[i], s, a,
                                         g.num_actions(s, i)));

  // (b) Random finite automata.
  std::mt19937_64 rng(seed);
  for (int b = 0; b < deviation_budget; ++b) {
    const int i = b % np;
    probe_profile("automaton", i, random_automaton(g, i, rng));
  }

  // (c) Exact best response over the induced chain (dominates the best
  // stationary deviation).
  for (int i = 0; i < np; ++i) {
    const DeviatorMdp mdp = build_deviator_mdp(g, sigma.profile, i, s0);
    double gain = -1e300;
    size_t p = 0;
    for (int n : horizons) {
      gain = std::max(gain,
                      deviator_value_nstage(mdp, n) - honest.payoff[p][i]);
      ++p;
    }
    for (double l : lambdas) {
      gain = std::max(gain, deviator_value_discounted(mdp, l, r) -
                                honest.payoff[p][i]);
      ++p;
    }
    record_gain("markov-best-response", i, gain);
  }

  rep.pass = floors_ok && rep.max_gain <= eps * r + 1e-9;
  return rep;
}

PipelineResult build_uniform_equilibrium(const StochasticGame& g, int s0,
                                         double eps, std::uint64_t seed) {
  PipelineResult out;
  const double r = std::max(g.payoff_bound, 1e-12);
  for (int i = 0; i < g.num_players(); ++i)
    out.values.push_back(uniform_value(g, i, ValueKind::kMinmax).limit);

  out.classification = classify(g, out.values, 1e-3 * std::max(r, 1.0));
  if (!out.classification.strongly_controllable)
    throw std::runtime_error(
        "game is not strongly controllable: a block is neither closed nor "
        "controllable");

  const Partition& dstar = out.classification.siblings;
  std::vector<BlockArtifact> artifacts;
  const std::vector<double> grid = default_lambda_grid();
  for (int b = 0; b < dstar.num_blocks(); ++b) {
    const std::vector<int>& block = dstar.blocks[b];
    const RestrictedGame restricted = restrict_game(g, block, out.values);
    const ModifiedSpec spec = step1_spec(g, block, out.values);
    DichotomyResult dich =
        dichotomy(restricted.game, spec, block, grid, 1e-2, 1e-3,
                  seed + static_cast<std::uint64_t>(b));

    BlockArtifact art;
    art.block = block;
    art.witness = strongly_controllable_witness(g, block);
    art.honest = dich.x1;
    if (dich.a1) {
      art.kind = BlockArtifact::kCycle;
      const IrreducibleClasses cls =
          irreducible_sets(restricted.game, block, dich.x1, spec.s0);
      // K by doubling until the N-stage average of sigma_K is close to the
      // beta-weighted class payoffs.
      std::vector<double> target(g.num_players(), 0.0);
      double total_beta = 0.0;
      for (double bb : cls.beta) total_beta += bb;
      for (size_t c = 0; c < cls.classes.size(); ++c) {
        // Class average payoff under x1: stationary distribution solve.
        const auto p = induced_chain(restricted.game, dich.x1);
        const int nc = static_cast<int>(cls.classes[c].size());
        Eigen::MatrixXd a(nc + 1, nc);
        Eigen::VectorXd rhs(nc + 1);
        for (int row = 0; row < nc; ++row) {
          for (int col = 0; col < nc; ++col)
            a(row, col) =
                p[cls.classes[c][col]][cls.classes[c][row]] -
                (row == col ? 1.0 : 0.0);
          rhs(row) = 0.0;
        }
        for (int col = 0; col < nc; ++col) a(nc, col) = 1.0;
        rhs(nc) = 1.0;
        const Eigen::VectorXd pi = a.colPivHouseholderQr().solve(rhs);
        for (int col = 0; col < nc; ++col) {
          const int s = cls.classes[c][col];
          for (int k = 0; k < restricted.game.num_profiles(s); ++k) {
            const double w = dich.x1.profile_weight(restricted.game, s, k);
            for (int i = 0; i < g.num_players(); ++i)
              target[i] += cls.beta[c] / std::max(total_beta, 1e-12) *
                           pi(col) * w * restricted.game.payoff[s][k][i];
          }
        }
      }
      int chosen_k = 16;
      for (; chosen_k <= 4096; chosen_k *= 2) {
        art.automata = build_sigma_K(restricted.game, block, cls, dich.x1,
                                     eps / 4.0, chosen_k);
        const std::vector<double> avg = n_stage_payoff(
            restricted.game, spec.s0, art.automata, 4 * chosen_k);
        double err = 0.0;
        for (int i = 0; i < g.num_players(); ++i)
          err = std::max(err, std::abs(avg[i] - target[i]));
        if (err <= 0.5 * eps * r) break;
      }
    } else {
      art.kind = BlockArtifact::kExit;
      if (!art.witness.found)
        throw std::runtime_error(
            "exit branch selected for a block without a control witness");
      double eta = 0.1;
      // Shrink eta until the closed-form exit probability clears 1 - eps/4.
      for (int tries = 0; tries < 4; ++tries) {
        const int visits =
            static_cast<int>(std::ceil(1.0 / (eta * eta)));
        if (1.0 - std::pow(1.0 - eta, visits) >= 1.0 - eps / 4.0) break;
        eta *= 0.5;
      }
      art.automata = build_exit_strategy(g, block, art.witness, dich.x1, eta,
                                         eps / 4.0);
    }
    out.dichotomies.push_back(std::move(dich));
    artifacts.push_back(std::move(art));
  }

  out.sigma = assemble_sigma_star(g, dstar, artifacts, s0, eps, out.values);
  return out;
}

}  // namespace sgsolve
