#include "sgsolve/values.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "sgsolve/lp.hpp"

namespace sgsolve {

namespace {

// Index helper for the coordinated adversary of player i: the opponents'
// joint actions at a state, enumerated mixed-radix in player order.
struct Adversary {
  int player;
  std::vector<int> opponents;

  explicit Adversary(const StochasticGame& g, int player_) : player(player_) {
    for (int j = 0; j < g.num_players(); ++j)
      if (j != player) opponents.push_back(j);
  }

  int num_joint(const StochasticGame& g, int s) const {
    int n = 1;
    for (int j : opponents) n *= g.num_actions(s, j);
    return n;
  }

  // Actions of the opponents (in `opponents` order) behind joint index b.
  std::vector<int> decode(const StochasticGame& g, int s, int b) const {
    std::vector<int> a(opponents.size());
    for (int idx = static_cast<int>(opponents.size()) - 1; idx >= 0; --idx) {
      const int n = g.num_actions(s, opponents[idx]);
      a[idx] = b % n;
      b /= n;
    }
    return a;
  }

  int full_profile(const StochasticGame& g, int s, int own, int b) const {
    std::vector<int> a(g.num_players());
    a[player] = own;
    const std::vector<int> opp = decode(g, s, b);
    for (size_t idx = 0; idx < opponents.size(); ++idx)
      a[opponents[idx]] = opp[idx];
    return g.profile_index(s, a);
  }
};

ValueReport shapley_value(const StochasticGame& g, int player, double lambda,
                          double tol) {
  if (lambda < 0.0 || lambda >= 1.0)
    throw std::invalid_argument("shapley: lambda must lie in [0,1)");
  const Adversary adv(g, player);
  const int ns = g.num_states();

  // Static parts of the one-shot matrix games: (1-lambda) u and the
  // transition row per (state, own action, joint adversary action).
  std::vector<std::vector<std::vector<double>>> base(ns);
  std::vector<std::vector<std::vector<const std::vector<double>*>>> trans(ns);
  for (int s = 0; s < ns; ++s) {
    const int na = g.num_actions(s, player);
    const int nb = adv.num_joint(g, s);
    base[s].assign(na, std::vector<double>(nb));
    trans[s].assign(na,
                    std::vector<const std::vector<double>*>(nb, nullptr));
    for (int a = 0; a < na; ++a)
      for (int b = 0; b < nb; ++b) {
        const int k = adv.full_profile(g, s, a, b);
        base[s][a][b] = (1.0 - lambda) * g.payoff[s][k][player];
        trans[s][a][b] = &g.transition[s][k];
      }
  }

  const double target =
      lambda > 0.0 ? tol * (1.0 - lambda) / (2.0 * lambda) : 0.0;
  ValueReport report;
  report.lambda = lambda;
  report.value.assign(ns, 0.0);
  report.own.prob.resize(ns);
  report.adversary.resize(ns);

  std::vector<double> next(ns);
  std::vector<std::vector<double>> m;
  const int max_iter = 20000000;
  for (int iter = 1; iter <= max_iter; ++iter) {
    double residual = 0.0;
    for (int s = 0; s < ns; ++s) {
      const int na = static_cast<int>(base[s].size());
      const int nb = static_cast<int>(base[s][0].size());
      m.assign(na, std::vector<double>(nb));
      for (int a = 0; a < na; ++a)
        for (int b = 0; b < nb; ++b) {
          double cont = 0.0;
          const std::vector<double>& q = *trans[s][a][b];
          for (int s2 = 0; s2 < ns; ++s2) cont += q[s2] * report.value[s2];
          m[a][b] = base[s][a][b] + lambda * cont;
        }
      if (na == 1 && nb == 1) {
        next[s] = m[0][0];
        report.own.prob[s] = {1.0};
        report.adversary[s] = {1.0};
      } else {
        const MatrixGameSolution sol = solve_matrix_game(m);
        next[s] = sol.value;
        report.own.prob[s] = sol.row_strategy;
        report.adversary[s] = sol.col_strategy;
      }
      residual = std::max(residual, std::abs(next[s] - report.value[s]));
    }
    report.value = next;
    report.iterations = iter;
    report.residual = residual;
    if (residual <= target) break;
  }
  if (report.residual > target)
    throw std::runtime_error("shapley: iteration budget exhausted");
  return report;
}

}  // namespace

ValueReport discounted_minmax(const StochasticGame& g, int player,
                              double lambda, double tol) {
  return shapley_value(g, player, lambda, tol);
}

ValueReport discounted_maxmin(const StochasticGame& g, int player,
                              double lambda, double tol) {
  // Against a coordinated adversary the one-shot games have values, so the
  // min-max and max-min recursions coincide.
  return shapley_value(g, player, lambda, tol);
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = 4; k <= 11; ++k) grid.push_back(1.0 - std::pow(2.0, -k));
  return grid;
}

UniformValueEstimate uniform_value(const StochasticGame& g, int player,
                                   ValueKind kind, std::vector<double> grid) {
  (void)kind;  // minmax and maxmin coincide against the coordinated adversary
  if (grid.empty()) grid = default_lambda_grid();
  for (size_t k = 1; k < grid.size(); ++k)
    if (grid[k] <= grid[k - 1])
      throw std::invalid_argument("uniform_value: grid must increase");
  const int ns = g.num_states();
  UniformValueEstimate est;
  est.grid = grid;
  for (double lambda : grid) {
    const ValueReport rep = discounted_minmax(g, player, lambda, 1e-6);
    est.table.push_back(rep.value);
  }
  const int n = static_cast<int>(grid.size());
  Eigen::MatrixXd a(n, 3);
  for (int k = 0; k < n; ++k) {
    a(k, 0) = 1.0;
    a(k, 1) = std::sqrt(1.0 - grid[k]);
    a(k, 2) = 1.0 - grid[k];
  }
  const auto qr = a.colPivHouseholderQr();
  est.limit.assign(ns, 0.0);
  est.fit_residual.assign(ns, 0.0);
  est.fallback.assign(ns, false);
  for (int s = 0; s < ns; ++s) {
    Eigen::VectorXd y(n);
    for (int k = 0; k < n; ++k) y(k) = est.table[k][s];
    const Eigen::VectorXd c = qr.solve(y);
    est.fit_residual[s] = std::sqrt((a * c - y).squaredNorm() / n);
    if (est.fit_residual[s] > 1e-2 * g.payoff_bound) {
      est.limit[s] = est.table[n - 1][s];
      est.fallback[s] = true;
    } else {
      est.limit[s] = c(0);
    }
  }
  return est;
}

namespace {

// Expected own-action payoff and kernel of the MDP player i faces when the
// opponents play their part of `opp`.
struct InducedMdp {
  std::vector<std::vector<double>> reward;  // [s][a]
  std::vector<std::vector<std::vector<double>>> kernel;  // [s][a][s2]
};

InducedMdp induce_mdp(const StochasticGame& g, int player,
                      const StationaryProfile& opp) {
  const int ns = g.num_states();
  InducedMdp mdp;
  mdp.reward.resize(ns);
  mdp.kernel.resize(ns);
  for (int s = 0; s < ns; ++s) {
    const int na = g.num_actions(s, player);
    mdp.reward[s].assign(na, 0.0);
    mdp.kernel[s].assign(na, std::vector<double>(ns, 0.0));
    for (int k = 0; k < g.num_profiles(s); ++k) {
      const std::vector<int> acts = g.profile_actions(s, k);
      double w = 1.0;
      for (int j = 0; j < g.num_players(); ++j)
        if (j != player) w *= opp.strategies[j].prob[s][acts[j]];
      if (w == 0.0) continue;
      const int a = acts[player];
      mdp.reward[s][a] += w * g.payoff[s][k][player];
      for (int s2 = 0; s2 < ns; ++s2)
        mdp.kernel[s][a][s2] += w * g.transition[s][k][s2];
    }
  }
  return mdp;
}

}  // namespace

BestResponse modified_best_response(const StochasticGame& g,
                                    const ModifiedSpec& spec, int player,
                                    const StationaryProfile& opponents) {
  const double lambda = spec.lambda(player);
  const int ns = g.num_states();
  const InducedMdp mdp = induce_mdp(g, player, opponents);
  const Partition& part = spec.partitions[player];
  const CutoffVector& cut = spec.cutoffs[player];

  // Variable layout: t(s,a) for all own state-actions, then one free z per
  // partition block.
  std::vector<int> off(ns);
  int nt = 0;
  for (int s = 0; s < ns; ++s) {
    off[s] = nt;
    nt += g.num_actions(s, player);
  }
  const int nb = part.num_blocks();
  LinearProgram lp;
  lp.num_vars = nt + nb;
  lp.objective.assign(lp.num_vars, 0.0);
  lp.free_var.assign(lp.num_vars, false);
  for (int b = 0; b < nb; ++b) {
    lp.objective[nt + b] = 1.0;
    lp.free_var[nt + b] = true;
  }
  // Balance: sum_a t(s',a) - lambda sum_{s,a} t(s,a) p(s'|s,a) = (1-l)1{s0}.
  for (int sp = 0; sp < ns; ++sp) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (int a = 0; a < g.num_actions(sp, player); ++a) row[off[sp] + a] = 1.0;
    for (int s = 0; s < ns; ++s)
      for (int a = 0; a < g.num_actions(s, player); ++a)
        row[off[s] + a] -= lambda * mdp.kernel[s][a][sp];
    lp.add_row(row, LinearProgram::EQ, sp == spec.s0 ? 1.0 - lambda : 0.0);
  }
  // z_D <= U_D(t) and z_D <= c(D) t(D).
  for (int b = 0; b < nb; ++b) {
    std::vector<double> pay(lp.num_vars, 0.0);
    std::vector<double> time(lp.num_vars, 0.0);
    pay[nt + b] = 1.0;
    time[nt + b] = 1.0;
    for (int s : part.blocks[b])
      for (int a = 0; a < g.num_actions(s, player); ++a) {
        pay[off[s] + a] -= mdp.reward[s][a];
        time[off[s] + a] -= cut[b];
      }
    lp.add_row(pay, LinearProgram::LE, 0.0);
    lp.add_row(time, LinearProgram::LE, 0.0);
  }

  const LpResult res = solve_lp(lp);
  if (res.status != LpResult::OPTIMAL) {
    std::ostringstream msg;
    msg << "modified_best_response: LP "
        << (res.status == LpResult::INFEASIBLE ? "infeasible" : "unbounded")
        << " (internal error)";
    throw std::runtime_error(msg.str());
  }

  BestResponse br;
  br.value = res.value;
  br.strategy.prob.resize(ns);
  for (int s = 0; s < ns; ++s) {
    const int na = g.num_actions(s, player);
    double total = 0.0;
    for (int a = 0; a < na; ++a) total += res.x[off[s] + a];
    br.strategy.prob[s].assign(na, 1.0 / na);
    if (total > 1e-12)
      for (int a = 0; a < na; ++a)
        br.strategy.prob[s][a] = res.x[off[s] + a] / total;
  }
  return br;
}

namespace {

double modified_value_of(const StochasticGame& g, const ModifiedSpec& spec,
                         const StationaryProfile& profile, int player) {
  const OccupationVector occ =
      occupation_stationary(g, spec.s0, spec.lambda(player), profile);
  return modified_payoff(g, spec, occ, player);
}

StationaryProfile random_profile(const StochasticGame& g,
                                 std::mt19937_64& rng) {
  std::exponential_distribution<double> ex(1.0);
  StationaryProfile p;
  p.strategies.resize(g.num_players());
  for (int i = 0; i < g.num_players(); ++i) {
    p.strategies[i].prob.resize(g.num_states());
    for (int s = 0; s < g.num_states(); ++s) {
      const int na = g.num_actions(s, i);
      std::vector<double> w(na);
      double tot = 0.0;
      for (int a = 0; a < na; ++a) tot += (w[a] = ex(rng) + 1e-9);
      for (int a = 0; a < na; ++a) w[a] /= tot;
      p.strategies[i].prob[s] = w;
    }
  }
  return p;
}

// True when a is lexicographically smaller than b on the flattened
// probability tables (1e-12 slack against numeric noise).
bool lex_less(const StationaryProfile& a, const StationaryProfile& b) {
  for (size_t i = 0; i < a.strategies.size(); ++i)
    for (size_t s = 0; s < a.strategies[i].prob.size(); ++s)
      for (size_t k = 0; k < a.strategies[i].prob[s].size(); ++k) {
        const double d =
            a.strategies[i].prob[s][k] - b.strategies[i].prob[s][k];
        if (d < -1e-12) return true;
        if (d > 1e-12) return false;
      }
  return false;
}

}  // namespace

EquilibriumResult stationary_equilibrium(const StochasticGame& g,
                                         const ModifiedSpec& spec, double eps,
                                         int restarts, std::uint64_t seed,
                                         const StationaryProfile* warm_start) {
  const int np = g.num_players();
  const double gap_tol = eps * std::max(g.payoff_bound, 1e-12);
  std::mt19937_64 rng(seed);

  std::vector<StationaryProfile> starts;
  if (warm_start) starts.push_back(*warm_start);
  starts.push_back(uniform_profile(g));
  while (static_cast<int>(starts.size()) < std::max(restarts, 1))
    starts.push_back(random_profile(g, rng));

  EquilibriumResult best;
  bool have_best = false;
  double best_gap = 0.0;
  const int max_iter = 150;

  // One full evaluation of a candidate profile: payoffs, per-player LP best
  // responses and gaps.
  struct Evaluation {
    std::vector<BestResponse> brs;
    std::vector<double> payoffs, gaps;
    double max_gap = 0.0;
  };
  const auto evaluate = [&](const StationaryProfile& p) {
    Evaluation ev;
    ev.brs.resize(np);
    ev.payoffs.resize(np);
    ev.gaps.resize(np);
    for (int i = 0; i < np; ++i) {
      ev.brs[i] = modified_best_response(g, spec, i, p);
      ev.payoffs[i] = modified_value_of(g, spec, p, i);
      ev.gaps[i] = std::max(0.0, ev.brs[i].value - ev.payoffs[i]);
      ev.max_gap = std::max(ev.max_gap, ev.gaps[i]);
    }
    return ev;
  };
  // Blend toward the best responses; `who` = -1 moves every player, else
  // only that player.
  const auto blend = [&](const StationaryProfile& p, const Evaluation& ev,
                         double step, int who = -1) {
    StationaryProfile out = p;
    for (int i = 0; i < np; ++i) {
      if (who >= 0 && i != who) continue;
      for (int s = 0; s < g.num_states(); ++s)
        for (int a = 0; a < g.num_actions(s, i); ++a)
          out.strategies[i].prob[s][a] =
              (1.0 - step) * p.strategies[i].prob[s][a] +
              step * ev.brs[i].strategy.prob[s][a];
    }
    return out;
  };

  for (int r = 0; r < static_cast<int>(starts.size()); ++r) {
    StationaryProfile cur = starts[r];
    Evaluation ev = evaluate(cur);
    // Phase 1: damped averaging toward the joint best response.
    for (int iter = 0; iter < max_iter && ev.max_gap > gap_tol; ++iter) {
      cur = blend(cur, ev, 1.0 / (2.0 + 0.5 * iter));
      ev = evaluate(cur);
    }
    // Phase 2: greedy descent on the gap along the best-response direction
    // with an adaptive step; converges into mixed equilibria where plain
    // averaging stalls.
    static const double kSteps[] = {1.0, 0.5, 0.2, 0.05, 0.02, 0.005, 0.001};
    for (int iter = 0; iter < 400 && ev.max_gap > gap_tol; ++iter) {
      StationaryProfile best_cand;
      Evaluation best_ev;
      bool improved = false;
      for (const double step : kSteps) {
        for (int who = -1; who < np; ++who) {
          StationaryProfile cand = blend(cur, ev, step, who);
          Evaluation cev = evaluate(cand);
          if (cev.max_gap < (improved ? best_ev.max_gap : ev.max_gap)) {
            best_cand = std::move(cand);
            best_ev = std::move(cev);
            improved = true;
          }
        }
      }
      if (!improved) break;
      cur = std::move(best_cand);
      ev = std::move(best_ev);
    }
    EquilibriumResult attempt;
    attempt.profile = cur;
    attempt.payoffs = ev.payoffs;
    attempt.gaps = ev.gaps;
    attempt.restarts_used = r + 1;
    attempt.certified = ev.max_gap <= gap_tol;
    const double attempt_gap = ev.max_gap;
    const bool better =
        !have_best ||
        (attempt.certified && !best.certified) ||
        (attempt.certified == best.certified &&
         (attempt.certified ? lex_less(attempt.profile, best.profile)
                            : attempt_gap < best_gap));
    if (better) {
      best = attempt;
      best_gap = attempt_gap;
      have_best = true;
      best.restarts_used = r + 1;
    }
  }
  return best;
}

std::vector<EquilibriumResult> trace_equilibria(const StochasticGame& g,
                                                const ModifiedSpec& spec,
                                                const std::vector<double>& grid,
                                                double eps, int restarts,
                                                std::uint64_t seed) {
  for (size_t k = 1; k < grid.size(); ++k)
    if (grid[k] <= grid[k - 1])
      throw std::invalid_argument("trace_equilibria: grid must increase");
  std::vector<EquilibriumResult> out;
  const StationaryProfile* warm = nullptr;
  for (size_t k = 0; k < grid.size(); ++k) {
    ModifiedSpec point = spec;
    point.lambdas.assign(g.num_players(), grid[k]);
    out.push_back(stationary_equilibrium(g, point, eps, restarts,
                                         seed + static_cast<std::uint64_t>(k),
                                         warm));
    warm = &out.back().profile;
  }
  return out;
}

namespace {

// A point of a product-of-simplices search space, plus the greedy pattern
// search used for both heuristic outer problems: try blending every block
// toward every vertex, accept improvements, shrink the step when stuck.
using SimplexBlocks = std::vector<std::vector<double>>;

template <typename Eval>
double pattern_search(SimplexBlocks& point, double& value, Eval eval,
                      int& evals_left) {
  for (double step = 0.5; step >= 1e-4; step *= 0.5) {
    bool improved = true;
    while (improved && evals_left > 0) {
      improved = false;
      for (size_t b = 0; b < point.size() && evals_left > 0; ++b) {
        for (size_t v = 0; v < point[b].size() && evals_left > 0; ++v) {
          SimplexBlocks cand = point;
          for (size_t a = 0; a < cand[b].size(); ++a)
            cand[b][a] *= (1.0 - step);
          cand[b][v] += step;
          --evals_left;
          const double val = eval(cand);
          if (val > value + 1e-12) {
            point = cand;
            value = val;
            improved = true;
          }
        }
      }
    }
    if (evals_left <= 0) break;
  }
  return value;
}

// Enumerates the opponents' pure stationary profiles as action tables
// [opponent order][state]; throws when there are more than `cap`.
std::vector<std::vector<std::vector<int>>> enumerate_pure_opponents(
    const StochasticGame& g, int player, long cap = 10000) {
  std::vector<int> opponents;
  for (int j = 0; j < g.num_players(); ++j)
    if (j != player) opponents.push_back(j);
  long count = 1;
  for (int j : opponents)
    for (int s = 0; s < g.num_states(); ++s) {
      count *= g.num_actions(s, j);
      if (count > cap)
        throw std::invalid_argument(
            "pure opponent profile count exceeds the supported bound");
    }
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::vector<int>> cur(opponents.size(),
                                    std::vector<int>(g.num_states(), 0));
  while (true) {
    out.push_back(cur);
    // Mixed-radix increment.
    int idx = static_cast<int>(opponents.size()) - 1;
    int s = g.num_states() - 1;
    while (idx >= 0) {
      if (++cur[idx][s] < g.num_actions(s, opponents[idx])) break;
      cur[idx][s] = 0;
      if (--s < 0) {
        s = g.num_states() - 1;
        --idx;
      }
    }
    if (idx < 0) break;
  }
  return out;
}

SimplexBlocks strategy_to_blocks(const StationaryStrategy& x) {
  return x.prob;
}

StationaryStrategy blocks_to_strategy(const SimplexBlocks& blocks) {
  StationaryStrategy x;
  x.prob = blocks;
  return x;
}

// Flattens the opponents' strategies (opponent order, then state) into
// simplex blocks and back.
SimplexBlocks opponents_to_blocks(const StochasticGame& g, int player,
                                  const StationaryProfile& p) {
  SimplexBlocks blocks;
  for (int j = 0; j < g.num_players(); ++j)
    if (j != player)
      for (int s = 0; s < g.num_states(); ++s)
        blocks.push_back(p.strategies[j].prob[s]);
  return blocks;
}

StationaryProfile blocks_to_opponents(const StochasticGame& g, int player,
                                      const SimplexBlocks& blocks) {
  StationaryProfile p = uniform_profile(g);
  size_t idx = 0;
  for (int j = 0; j < g.num_players(); ++j)
    if (j != player)
      for (int s = 0; s < g.num_states(); ++s)
        p.strategies[j].prob[s] = blocks[idx++];
  return p;
}

}  // namespace

StatSearchResult modified_minmax_stat(const StochasticGame& g,
                                      const ModifiedSpec& spec, int player,
                                      int budget) {
  StatSearchResult result;
  if (g.num_players() == 1) {
    const BestResponse br =
        modified_best_response(g, spec, player, uniform_profile(g));
    result.value = br.value;
    result.profile.strategies = {br.strategy};
    result.evaluations = 1;
    return result;
  }

  int evals_left = budget;
  int used = 0;
  const auto eval = [&](const SimplexBlocks& blocks) {
    ++used;
    const StationaryProfile opp = blocks_to_opponents(g, player, blocks);
    return -modified_best_response(g, spec, player, opp).value;
  };

  // Seeds: every pure opponent profile, the Shapley adversary's per-opponent
  // marginals, and the uniform profile.
  std::vector<SimplexBlocks> seeds;
  for (const auto& pure : enumerate_pure_opponents(g, player)) {
    StationaryProfile p = uniform_profile(g);
    int idx = 0;
    for (int j = 0; j < g.num_players(); ++j) {
      if (j == player) continue;
      for (int s = 0; s < g.num_states(); ++s) {
        p.strategies[j].prob[s].assign(g.num_actions(s, j), 0.0);
        p.strategies[j].prob[s][pure[idx][s]] = 1.0;
      }
      ++idx;
    }
    seeds.push_back(opponents_to_blocks(g, player, p));
  }
  {
    const ValueReport shap =
        discounted_minmax(g, player, spec.lambda(player), 1e-8);
    const Adversary adv(g, player);
    StationaryProfile p = uniform_profile(g);
    for (int s = 0; s < g.num_states(); ++s) {
      int idx = 0;
      for (int j : adv.opponents) {
        std::vector<double> marg(g.num_actions(s, j), 0.0);
        for (int b = 0; b < adv.num_joint(g, s); ++b)
          marg[adv.decode(g, s, b)[idx]] += shap.adversary[s][b];
        p.strategies[j].prob[s] = marg;
        ++idx;
      }
    }
    seeds.push_back(opponents_to_blocks(g, player, p));
  }
  seeds.push_back(opponents_to_blocks(g, player, uniform_profile(g)));

  SimplexBlocks best_point;
  double best_neg = 0.0;
  bool have = false;
  for (const SimplexBlocks& seed : seeds) {
    if (evals_left <= 0 && have) break;
    --evals_left;
    const double val = eval(seed);
    if (!have || val > best_neg) {
      best_neg = val;
      best_point = seed;
      have = true;
    }
  }
  pattern_search(best_point, best_neg, eval, evals_left);

  const StationaryProfile opp = blocks_to_opponents(g, player, best_point);
  const BestResponse br = modified_best_response(g, spec, player, opp);
  result.value = br.value;
  result.profile = opp;
  result.profile.strategies[player] = br.strategy;
  result.evaluations = used;
  return result;
}

StatSearchResult modified_maxmin_stat(const StochasticGame& g,
                                      const ModifiedSpec& spec, int player,
                                      int budget) {
  StatSearchResult result;
  const std::vector<std::vector<std::vector<int>>> pures =
      g.num_players() > 1
          ? enumerate_pure_opponents(g, player)
          : std::vector<std::vector<std::vector<int>>>{{}};
  std::vector<int> opponents;
  for (int j = 0; j < g.num_players(); ++j)
    if (j != player) opponents.push_back(j);

  int worst_pure = 0;
  const auto value_against_worst = [&](const StationaryStrategy& x,
                                       int* argmin) {
    double worst = 0.0;
    bool first = true;
    for (size_t p = 0; p < pures.size(); ++p) {
      StationaryProfile prof = uniform_profile(g);
      prof.strategies[player] = x;
      for (size_t idx = 0; idx < opponents.size(); ++idx)
        for (int s = 0; s < g.num_states(); ++s) {
          const int j = opponents[idx];
          prof.strategies[j].prob[s].assign(g.num_actions(s, j), 0.0);
          prof.strategies[j].prob[s][pures[p][idx][s]] = 1.0;
        }
      const double v = modified_value_of(g, spec, prof, player);
      if (first || v < worst) {
        worst = v;
        if (argmin) *argmin = static_cast<int>(p);
        first = false;
      }
    }
    return worst;
  };

  int evals_left = budget;
  int used = 0;
  const auto eval = [&](const SimplexBlocks& blocks) {
    ++used;
    return value_against_worst(blocks_to_strategy(blocks), nullptr);
  };

  // Seeds: uniform, own pure strategies (all when few, sampled otherwise),
  // and a handful of random mixtures.
  std::mt19937_64 rng(20240901);
  std::vector<SimplexBlocks> seeds;
  seeds.push_back(strategy_to_blocks(uniform_strategy(g, player)));
  long own_pures = 1;
  for (int s = 0; s < g.num_states(); ++s)
    own_pures = std::min<long>(own_pures * g.num_actions(s, player), 1 << 20);
  if (own_pures <= 256) {
    std::vector<int> a(g.num_states(), 0);
    while (true) {
      seeds.push_back(strategy_to_blocks(pure_strategy(g, player, a)));
      int s = g.num_states() - 1;
      while (s >= 0 && ++a[s] >= g.num_actions(s, player)) a[s--] = 0;
      if (s < 0) break;
    }
  }
  for (int r = 0; r < 8; ++r)
    seeds.push_back(strategy_to_blocks(random_profile(g, rng)
                                           .strategies[player]));

  SimplexBlocks best_point;
  double best_val = 0.0;
  bool have = false;
  for (const SimplexBlocks& seed : seeds) {
    if (evals_left <= 0 && have) break;
    --evals_left;
    const double val = eval(seed);
    if (!have || val > best_val) {
      best_val = val;
      best_point = seed;
      have = true;
    }
  }
  pattern_search(best_point, best_val, eval, evals_left);

  // Fine 1-d refinement: short golden-section pass per (state, action)
  // coordinate around the incumbent.
  for (size_t b = 0; b < best_point.size(); ++b)
    for (size_t v = 0; v < best_point[b].size() && evals_left > 0; ++v) {
      double lo = -best_point[b][v] / (1.0 - best_point[b][v] + 1e-15);
      double hi = 1.0;
      const auto at = [&](double step) {
        SimplexBlocks cand = best_point;
        for (size_t a = 0; a < cand[b].size(); ++a) cand[b][a] *= (1.0 - step);
        cand[b][v] += step;
        --evals_left;
        return eval(cand);
      };
      const double phi = 0.6180339887498949;
      double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
      double f1 = at(x1), f2 = at(x2);
      for (int it = 0; it < 25 && evals_left > 0; ++it) {
        if (f1 < f2) {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + phi * (hi - lo);
          f2 = at(x2);
        } else {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - phi * (hi - lo);
          f1 = at(x1);
        }
      }
      const double step = f1 > f2 ? x1 : x2;
      const double fstep = std::max(f1, f2);
      if (fstep > best_val + 1e-12) {
        for (size_t a = 0; a < best_point[b].size(); ++a)
          best_point[b][a] *= (1.0 - step);
        best_point[b][v] += step;
        best_val = fstep;
      }
    }

  const StationaryStrategy x = blocks_to_strategy(best_point);
  best_val = value_against_worst(x, &worst_pure);
  result.value = best_val;
  result.profile = uniform_profile(g);
  result.profile.strategies[player] = x;
  for (size_t idx = 0; idx < opponents.size(); ++idx)
    for (int s = 0; s < g.num_states(); ++s) {
      const int j = opponents[idx];
      result.profile.strategies[j].prob[s].assign(g.num_actions(s, j), 0.0);
      result.profile.strategies[j].prob[s][pures[worst_pure][idx][s]] = 1.0;
    }
  result.evaluations = used;
  return result;
}

}  // namespace sgsolve
