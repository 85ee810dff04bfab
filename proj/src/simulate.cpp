#include "sgsolve/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sgsolve {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 53-bit uniform in [0,1) drawn directly from the engine output, so results
// do not depend on the standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_index(const std::vector<double>& weights, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

}  // namespace

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t play,
                         std::uint64_t stage) {
  return splitmix64(splitmix64(seed ^ splitmix64(play)) ^ splitmix64(stage));
}

PlayRecord simulate(const StochasticGame& g,
                    const std::vector<AutomatonStrategy>& profile, int s0,
                    int horizon, std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("simulate: horizon >= 1");
  if (static_cast<int>(profile.size()) != g.num_players())
    throw std::invalid_argument("simulate: one automaton per player");
  std::mt19937_64 rng(split_seed(seed, 0));
  PlayRecord play;
  int s = s0;
  std::vector<int> mem(g.num_players());
  for (int i = 0; i < g.num_players(); ++i) mem[i] = profile[i].initial;
  play.states.push_back(s);
  for (int n = 0; n < horizon; ++n) {
    std::vector<int> acts(g.num_players());
    for (int i = 0; i < g.num_players(); ++i)
      acts[i] = sample_index(profile[i].emit[mem[i]][s], rng);
    const int k = g.profile_index(s, acts);
    const int s2 = sample_index(g.transition[s][k], rng);
    play.profiles.push_back(k);
    play.payoffs.push_back(g.payoff[s][k]);
    for (int i = 0; i < g.num_players(); ++i)
      mem[i] = profile[i].update(mem[i], s, k, s2);
    s = s2;
    play.states.push_back(s);
  }
  return play;
}

RunSegmentation segment_runs(const PlayRecord& play, const Partition& part) {
  RunSegmentation seg;
  seg.tau.push_back(0);
  int run = 0;
  for (size_t n = 0; n < play.states.size(); ++n) {
    if (n > 0 &&
        part.index[play.states[n]] != part.index[play.states[n - 1]]) {
      seg.tau.push_back(static_cast<int>(n));
      ++run;
      ++seg.switches;
    }
    seg.run_index.push_back(run);
  }
  return seg;
}

AutomatonStrategy restart_wrapper(const AutomatonStrategy& sigma,
                                  const Partition& part) {
  AutomatonStrategy out = sigma;
  const auto inner = sigma.update;
  const int initial = sigma.initial;
  const std::vector<int> index = part.index;
  out.update = [inner, initial, index](int m, int s, int k, int s2) {
    if (index[s2] != index[s]) return initial;
    return inner(m, s, k, s2);
  };
  return out;
}

std::pair<long, long> run_length_constants(double eps, long n, long zeta) {
  if (eps <= 0.0 || eps >= 1.0 || n < 1 || zeta < 1)
    throw std::invalid_argument("run_length_constants: need eps in (0,1), "
                                "N >= 1, zeta >= 1");
  const long m = static_cast<long>(
      std::ceil(2.0 * static_cast<double>(zeta) * static_cast<double>(n) /
                eps));
  const long l0 = static_cast<long>(
      std::ceil(2.0 * static_cast<double>(zeta) * static_cast<double>(m) /
                eps));
  return {m, l0};
}

CoinRunReport coin_run_oracle(double p, int samples, std::uint64_t seed) {
  if (p < 0.0 || p >= 1.0)
    throw std::invalid_argument("coin_run_oracle: p in [0,1)");
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < samples; ++i) {
    std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(i)));
    long k = 0;
    while (uniform01(rng) < p) ++k;
    sum += static_cast<double>(k);
    sumsq += static_cast<double>(k) * static_cast<double>(k);
  }
  CoinRunReport rep;
  rep.mean = sum / samples;
  const double var =
      std::max(0.0, (sumsq - sum * sum / samples) / (samples - 1));
  rep.ci99 = 2.5758293035489004 * std::sqrt(var / samples);
  rep.candidate_one_over = 1.0 / (1.0 - p);
  rep.candidate_p_over = p / (1.0 - p);
  const bool a = std::abs(rep.mean - rep.candidate_one_over) <= rep.ci99;
  const bool b = std::abs(rep.mean - rep.candidate_p_over) <= rep.ci99;
  rep.matches = a && b ? "both" : a ? "1/(1-p)" : b ? "p/(1-p)" : "neither";
  return rep;
}

McEstimate mc_discounted_payoff(const StochasticGame& g,
                                const std::vector<AutomatonStrategy>& profile,
                                int s0, double lambda, int plays,
                                std::uint64_t seed) {
  if (plays < 100)
    throw std::invalid_argument("mc_discounted_payoff: plays >= 100");
  // Truncate where the discounted tail is negligible against the target
  // CI scale of 1e-3 * R.
  const double tail_target = 1e-4 * std::max(g.payoff_bound, 1e-12);
  int horizon = 1;
  while (std::pow(lambda, horizon) * g.payoff_bound > tail_target &&
         horizon < 2000000)
    ++horizon;
  const double tail_bound = std::pow(lambda, horizon) * g.payoff_bound;

  const int np = g.num_players();
  const int batches = 10;
  const int per_batch = plays / batches;
  std::vector<std::vector<double>> batch_mean(
      batches, std::vector<double>(np, 0.0));
  std::vector<double> total(np, 0.0);
  int used = 0;
  for (int b = 0; b < batches; ++b) {
    for (int j = 0; j < per_batch; ++j) {
      const int play_idx = b * per_batch + j;
      std::mt19937_64 rng(
          split_seed(seed, static_cast<std::uint64_t>(play_idx) + 1));
      int s = s0;
      std::vector<int> mem(np);
      for (int i = 0; i < np; ++i) mem[i] = profile[i].initial;
      double w = 1.0 - lambda;
      std::vector<double> disc(np, 0.0);
      for (int n = 0; n < horizon; ++n) {
        std::vector<int> acts(np);
        for (int i = 0; i < np; ++i)
          acts[i] = sample_index(profile[i].emit[mem[i]][s], rng);
        const int k = g.profile_index(s, acts);
        for (int i = 0; i < np; ++i) disc[i] += w * g.payoff[s][k][i];
        const int s2 = sample_index(g.transition[s][k], rng);
        for (int i = 0; i < np; ++i)
          mem[i] = profile[i].update(mem[i], s, k, s2);
        s = s2;
        w *= lambda;
      }
      for (int i = 0; i < np; ++i) batch_mean[b][i] += disc[i];
      ++used;
    }
    for (int i = 0; i < np; ++i) {
      total[i] += batch_mean[b][i];
      batch_mean[b][i] /= per_batch;
    }
  }
  McEstimate est;
  est.plays = used;
  est.horizon = horizon;
  est.estimate.assign(np, 0.0);
  est.ci.assign(np, 0.0);
  for (int i = 0; i < np; ++i) {
    est.estimate[i] = total[i] / used;
    double var = 0.0;
    for (int b = 0; b < batches; ++b) {
      const double d = batch_mean[b][i] - est.estimate[i];
      var += d * d;
    }
    var /= (batches - 1);
    est.ci[i] =
        2.5758293035489004 * std::sqrt(var / batches) + tail_bound;
  }
  return est;
}

}  // namespace sgsolve
