#include "sgsolve/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>

namespace sgsolve {

double OccupationVector::state_total(int s) const {
  double t = 0.0;
  for (double v : entries[s]) t += v;
  return t;
}

double OccupationVector::total() const {
  double t = 0.0;
  for (int s = 0; s < static_cast<int>(entries.size()); ++s)
    t += state_total(s);
  return t;
}

double occupation_residual(const StochasticGame& g, const OccupationVector& t) {
  double res = std::fabs(t.total() - 1.0);
  for (int s = 0; s < g.num_states(); ++s) {
    double inflow = (s == t.s0) ? (1.0 - t.lambda) : 0.0;
    for (int s2 = 0; s2 < g.num_states(); ++s2)
      for (int k = 0; k < g.num_profiles(s2); ++k)
        inflow += t.lambda * t.entries[s2][k] * g.transition[s2][k][s];
    res = std::max(res, std::fabs(t.state_total(s) - inflow));
  }
  return res;
}

OccupationVector occupation_stationary(const StochasticGame& g, int s0,
                                       double lambda,
                                       const StationaryProfile& profile) {
  if (lambda < 0.0 || lambda >= 1.0)
    throw std::invalid_argument("occupation_stationary: lambda must be in [0,1)");
  const int ns = g.num_states();
  // One-step kernel under the profile, then the balance system
  // (I - lambda P^T) t = (1-lambda) e_{s0} solved exactly.
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(ns, ns);
  for (int s = 0; s < ns; ++s)
    for (int k = 0; k < g.num_profiles(s); ++k) {
      const double w = profile.profile_weight(g, s, k);
      if (w == 0.0) continue;
      for (int s2 = 0; s2 < ns; ++s2)
        a(s2, s) -= lambda * w * g.transition[s][k][s2];
    }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ns);
  rhs(s0) = 1.0 - lambda;
  const Eigen::VectorXd t = a.partialPivLu().solve(rhs);

  OccupationVector occ;
  occ.lambda = lambda;
  occ.s0 = s0;
  occ.entries.resize(ns);
  for (int s = 0; s < ns; ++s) {
    occ.entries[s].assign(g.num_profiles(s), 0.0);
    for (int k = 0; k < g.num_profiles(s); ++k)
      occ.entries[s][k] = t(s) * profile.profile_weight(g, s, k);
  }
  if (occupation_residual(g, occ) > 1e-6)
    throw std::runtime_error("occupation_stationary: internal residual too large");
  return occ;
}

namespace {

// Reachable part of the joint (memory vector, state) product chain.
struct ProductChain {
  struct Edge {
    int to;
    double p;
  };
  std::vector<std::vector<int>> keys;          // memories..., state
  std::vector<std::vector<Edge>> edges;        // outgoing, probability-weighted
  std::vector<std::vector<double>> emit_prob;  // [node][profile] joint weight
  std::vector<int> state_of;
  int start = 0;
};

ProductChain build_chain(const StochasticGame& g, int s0,
                         const std::vector<AutomatonStrategy>& profile,
                         int cap) {
  const int np = g.num_players();
  ProductChain chain;
  std::map<std::vector<int>, int> index;
  std::vector<int> key(np + 1);
  for (int i = 0; i < np; ++i) key[i] = profile[i].initial;
  key[np] = s0;
  index[key] = 0;
  chain.keys.push_back(key);
  for (int id = 0; id < static_cast<int>(chain.keys.size()); ++id) {
    const std::vector<int> cur = chain.keys[id];
    const int s = cur[np];
    chain.state_of.push_back(s);
    chain.emit_prob.emplace_back(g.num_profiles(s), 0.0);
    chain.edges.emplace_back();
    std::map<int, double> out;
    for (int k = 0; k < g.num_profiles(s); ++k) {
      const std::vector<int> acts = g.profile_actions(s, k);
      double w = 1.0;
      for (int i = 0; i < np; ++i)
        w *= profile[i].emit[cur[i]][s][acts[i]];
      if (w == 0.0) continue;
      chain.emit_prob[id][k] = w;
      for (int s2 = 0; s2 < g.num_states(); ++s2) {
        const double q = g.transition[s][k][s2];
        if (q == 0.0) continue;
        std::vector<int> nxt(np + 1);
        for (int i = 0; i < np; ++i)
          nxt[i] = profile[i].update(cur[i], s, k, s2);
        nxt[np] = s2;
        auto [it, fresh] = index.try_emplace(nxt, chain.keys.size());
        if (fresh) {
          chain.keys.push_back(nxt);
          if (static_cast<int>(chain.keys.size()) > cap)
            throw std::runtime_error(
                "occupation_automaton: product chain exceeds cap");
        }
        out[it->second] += w * q;
      }
    }
    for (const auto& [to, p] : out) chain.edges[id].push_back({to, p});
  }
  return chain;
}

// Discounted node occupancies of a product chain; dense LU for small chains,
// geometric forward series (tail mass bounded by lambda^n) for large ones.
std::vector<double> chain_occupancies(const ProductChain& chain,
                                      double lambda) {
  const int n = static_cast<int>(chain.keys.size());
  if (n <= 1500) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (int v = 0; v < n; ++v)
      for (const auto& e : chain.edges[v]) a(e.to, v) -= lambda * e.p;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(chain.start) = 1.0 - lambda;
    const Eigen::VectorXd t = a.partialPivLu().solve(rhs);
    return std::vector<double>(t.data(), t.data() + n);
  }
  std::vector<double> occ(n, 0.0), mu(n, 0.0), nxt(n);
  mu[chain.start] = 1.0;
  double w = 1.0 - lambda;
  while (w > 1e-15 * (1.0 - lambda)) {
    for (int v = 0; v < n; ++v) occ[v] += w * mu[v];
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (int v = 0; v < n; ++v) {
      if (mu[v] == 0.0) continue;
      for (const auto& e : chain.edges[v]) nxt[e.to] += mu[v] * e.p;
    }
    mu.swap(nxt);
    w *= lambda;
  }
  return occ;
}

}  // namespace

OccupationVector occupation_automaton(
    const StochasticGame& g, int s0, double lambda,
    const std::vector<AutomatonStrategy>& profile, int cap) {
  if (lambda < 0.0 || lambda >= 1.0)
    throw std::invalid_argument("occupation_automaton: lambda must be in [0,1)");
  const ProductChain chain = build_chain(g, s0, profile, cap);
  const std::vector<double> t = chain_occupancies(chain, lambda);
  OccupationVector occ;
  occ.lambda = lambda;
  occ.s0 = s0;
  occ.entries.resize(g.num_states());
  for (int s = 0; s < g.num_states(); ++s)
    occ.entries[s].assign(g.num_profiles(s), 0.0);
  for (int v = 0; v < static_cast<int>(chain.keys.size()); ++v) {
    const int s = chain.state_of[v];
    for (int k = 0; k < g.num_profiles(s); ++k)
      occ.entries[s][k] += t[v] * chain.emit_prob[v][k];
  }
  return occ;
}

std::vector<double> discounted_payoff(const StochasticGame& g,
                                      const OccupationVector& occ) {
  std::vector<double> out(g.num_players(), 0.0);
  for (int s = 0; s < g.num_states(); ++s)
    for (int k = 0; k < g.num_profiles(s); ++k) {
      const double t = occ.entries[s][k];
      if (t == 0.0) continue;
      for (int i = 0; i < g.num_players(); ++i)
        out[i] += t * g.payoff[s][k][i];
    }
  return out;
}

std::vector<double> n_stage_payoff(const StochasticGame& g, int s0,
                                   const std::vector<AutomatonStrategy>& profile,
                                   int n, int cap) {
  if (n < 1) throw std::invalid_argument("n_stage_payoff: n >= 1 required");
  const ProductChain chain = build_chain(g, s0, profile, cap);
  const int nn = static_cast<int>(chain.keys.size());
  std::vector<double> mu(nn, 0.0), nxt(nn);
  mu[chain.start] = 1.0;
  std::vector<double> total(g.num_players(), 0.0);
  // Expected stage payoff per node, computed once.
  std::vector<std::vector<double>> node_u(nn,
                                          std::vector<double>(g.num_players()));
  for (int v = 0; v < nn; ++v) {
    const int s = chain.state_of[v];
    for (int k = 0; k < g.num_profiles(s); ++k) {
      const double w = chain.emit_prob[v][k];
      if (w == 0.0) continue;
      for (int i = 0; i < g.num_players(); ++i)
        node_u[v][i] += w * g.payoff[s][k][i];
    }
  }
  for (int stage = 0; stage < n; ++stage) {
    for (int v = 0; v < nn; ++v) {
      if (mu[v] == 0.0) continue;
      for (int i = 0; i < g.num_players(); ++i)
        total[i] += mu[v] * node_u[v][i];
    }
    if (stage + 1 == n) break;
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (int v = 0; v < nn; ++v) {
      if (mu[v] == 0.0) continue;
      for (const auto& e : chain.edges[v]) nxt[e.to] += mu[v] * e.p;
    }
    mu.swap(nxt);
  }
  for (double& u : total) u /= n;
  return total;
}

std::vector<double> n_stage_payoff(const StochasticGame& g, int s0,
                                   const StationaryProfile& profile, int n) {
  std::vector<AutomatonStrategy> autos;
  for (const auto& x : profile.strategies) autos.push_back(as_automaton(g, x));
  return n_stage_payoff(g, s0, autos, n);
}

BlockBreakdown block_breakdown(const StochasticGame& g,
                               const OccupationVector& occ,
                               const std::vector<std::vector<int>>& blocks) {
  std::vector<int> owner(g.num_states(), -1);
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b)
    for (int s : blocks[b]) {
      if (s < 0 || s >= g.num_states() || owner[s] >= 0)
        throw std::invalid_argument("block_breakdown: blocks must partition S");
      owner[s] = b;
    }
  for (int s = 0; s < g.num_states(); ++s)
    if (owner[s] < 0)
      throw std::invalid_argument("block_breakdown: blocks must cover S");
  BlockBreakdown bb;
  bb.blocks = blocks;
  bb.time.assign(blocks.size(), 0.0);
  bb.payoff.assign(blocks.size(), std::vector<double>(g.num_players(), 0.0));
  for (int s = 0; s < g.num_states(); ++s) {
    const int b = owner[s];
    for (int k = 0; k < g.num_profiles(s); ++k) {
      const double t = occ.entries[s][k];
      bb.time[b] += t;
      if (t == 0.0) continue;
      for (int i = 0; i < g.num_players(); ++i)
        bb.payoff[b][i] += t * g.payoff[s][k][i];
    }
  }
  return bb;
}

StationaryStrategy equivalent_stationary(const StochasticGame& g,
                                         const OccupationVector& occ,
                                         int player) {
  constexpr double kVisitedTol = 1e-15;
  StationaryStrategy x;
  x.prob.resize(g.num_states());
  for (int s = 0; s < g.num_states(); ++s) {
    const int na = g.num_actions(s, player);
    const double ts = occ.state_total(s);
    if (ts <= kVisitedTol) {
      // Unvisited: the occupation vector pins nothing down; uniform default.
      x.prob[s].assign(na, 1.0 / na);
      continue;
    }
    x.prob[s].assign(na, 0.0);
    for (int k = 0; k < g.num_profiles(s); ++k)
      x.prob[s][g.profile_actions(s, k)[player]] += occ.entries[s][k] / ts;
  }
  return x;
}

StationaryStrategy mixture_stationary(const StochasticGame& g, int s0,
                                      double lambda,
                                      const StationaryStrategy& x,
                                      const StationaryStrategy& xp,
                                      double alpha, int player) {
  for (int i = 0; i < g.num_players(); ++i) {
    if (i == player) continue;
    for (int s = 0; s < g.num_states(); ++s)
      if (g.num_actions(s, i) > 1)
        throw std::invalid_argument(
            "mixture_stationary: single-controller problems only");
  }
  auto as_profile = [&](const StationaryStrategy& y) {
    StationaryProfile p;
    for (int i = 0; i < g.num_players(); ++i)
      p.strategies.push_back(i == player ? y : uniform_strategy(g, i));
    return p;
  };
  const OccupationVector ta =
      occupation_stationary(g, s0, lambda, as_profile(x));
  const OccupationVector tb =
      occupation_stationary(g, s0, lambda, as_profile(xp));
  OccupationVector mix = ta;
  for (int s = 0; s < g.num_states(); ++s)
    for (int k = 0; k < g.num_profiles(s); ++k)
      mix.entries[s][k] =
          alpha * ta.entries[s][k] + (1.0 - alpha) * tb.entries[s][k];
  return equivalent_stationary(g, mix, player);
}

double AbelDecomposition::reconstructed() const {
  double v = head;
  for (size_t i = 0; i < tail_weights.size(); ++i)
    v += tail_weights[i] * tail_averages[i];
  return v;
}

AbelDecomposition abel_decompose(const std::vector<double>& xs, double lambda,
                                 int m) {
  const int l_max = static_cast<int>(xs.size()) - 1;
  if (m < 0 || m > l_max)
    throw std::invalid_argument("abel_decompose: need 0 <= M <= L");
  AbelDecomposition d;
  const double lam_m = std::pow(lambda, m);
  double lam_n = 1.0;
  for (int n = 0; n < m; ++n) {
    d.head += (lam_n - lam_m) * xs[n];
    lam_n *= lambda;
  }
  double run_sum = 0.0;
  for (int n = 0; n < m; ++n) run_sum += xs[n];
  double lam_l = lam_m;
  for (int l = m; l <= l_max; ++l) {
    run_sum += xs[l];
    const double avg = run_sum / (l + 1);
    // The constant tail l >= L collapses into one weight (L+1) lambda^L.
    const double w = (l < l_max) ? (l + 1) * (lam_l - lam_l * lambda)
                                 : (l + 1) * lam_l;
    d.tail_weights.push_back(w);
    d.tail_averages.push_back(avg);
    lam_l *= lambda;
  }
  return d;
}

}  // namespace sgsolve
