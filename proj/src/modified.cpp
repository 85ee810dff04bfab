#include "sgsolve/modified.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sgsolve {

Partition Partition::from_blocks(int num_states,
                                 const std::vector<std::vector<int>>& blocks) {
  Partition p;
  p.blocks = blocks;
  p.index.assign(num_states, -1);
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
    if (blocks[b].empty())
      throw std::invalid_argument("partition: empty block");
    for (int s : blocks[b]) {
      if (s < 0 || s >= num_states || p.index[s] >= 0)
        throw std::invalid_argument("partition: blocks must be disjoint states");
      p.index[s] = b;
    }
  }
  for (int s = 0; s < num_states; ++s)
    if (p.index[s] < 0)
      throw std::invalid_argument("partition: blocks must cover all states");
  return p;
}

Partition Partition::singletons(int num_states) {
  std::vector<std::vector<int>> blocks;
  for (int s = 0; s < num_states; ++s) blocks.push_back({s});
  return from_blocks(num_states, blocks);
}

Partition Partition::trivial(int num_states) {
  std::vector<int> all(num_states);
  for (int s = 0; s < num_states; ++s) all[s] = s;
  return from_blocks(num_states, {all});
}

bool ModifiedSpec::shared_lambda() const {
  for (double l : lambdas)
    if (l != lambdas[0]) return false;
  return true;
}

ModifiedSpec make_spec(const StochasticGame& g, int s0, double lambda,
                       const std::vector<Partition>& partitions,
                       const std::vector<CutoffVector>& cutoffs) {
  if (static_cast<int>(partitions.size()) != g.num_players() ||
      static_cast<int>(cutoffs.size()) != g.num_players())
    throw std::invalid_argument("make_spec: one partition/cutoff per player");
  for (int i = 0; i < g.num_players(); ++i)
    if (partitions[i].num_blocks() != static_cast<int>(cutoffs[i].size()))
      throw std::invalid_argument("make_spec: cutoff count mismatch");
  ModifiedSpec spec;
  spec.s0 = s0;
  spec.lambdas.assign(g.num_players(), lambda);
  spec.partitions = partitions;
  spec.cutoffs = cutoffs;
  return spec;
}

ModifiedSpec unmodified_spec(const StochasticGame& g, int s0, double lambda) {
  const Partition triv = Partition::trivial(g.num_states());
  return make_spec(g, s0, lambda,
                   std::vector<Partition>(g.num_players(), triv),
                   std::vector<CutoffVector>(g.num_players(),
                                             {g.payoff_bound}));
}

double modified_payoff(const StochasticGame& g, const ModifiedSpec& spec,
                       const OccupationVector& occ, int player) {
  if (occ.s0 != spec.s0 || occ.lambda != spec.lambda(player))
    throw std::invalid_argument(
        "modified_payoff: occupation vector not at the spec's (s0, lambda)");
  const Partition& part = spec.partitions[player];
  const BlockBreakdown bb = block_breakdown(g, occ, part.blocks);
  double total = 0.0;
  for (int b = 0; b < part.num_blocks(); ++b)
    total += std::min(bb.payoff[b][player],
                      bb.time[b] * spec.cutoffs[player][b]);
  return total;
}

std::vector<double> modified_payoff_profile(const StochasticGame& g,
                                            const ModifiedSpec& spec,
                                            const StationaryProfile& profile) {
  std::vector<double> out(g.num_players());
  OccupationVector occ;
  bool have = false;
  for (int i = 0; i < g.num_players(); ++i) {
    if (!have || occ.lambda != spec.lambda(i)) {
      occ = occupation_stationary(g, spec.s0, spec.lambda(i), profile);
      have = true;
    }
    out[i] = modified_payoff(g, spec, occ, i);
  }
  return out;
}

std::vector<double> modified_payoff_profile(
    const StochasticGame& g, const ModifiedSpec& spec,
    const std::vector<AutomatonStrategy>& profile) {
  std::vector<double> out(g.num_players());
  OccupationVector occ;
  bool have = false;
  for (int i = 0; i < g.num_players(); ++i) {
    if (!have || occ.lambda != spec.lambda(i)) {
      occ = occupation_automaton(g, spec.s0, spec.lambda(i), profile);
      have = true;
    }
    out[i] = modified_payoff(g, spec, occ, i);
  }
  return out;
}

bool check_min_superadditivity(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int n = 0; n < samples; ++n) {
    const double a1 = u(rng), b1 = u(rng), a2 = u(rng), b2 = u(rng);
    if (std::min(a1, b1) + std::min(a2, b2) >
        std::min(a1 + a2, b1 + b2) + 1e-12)
      return false;
  }
  return true;
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ModifiedSpec spec_from_json_text(const StochasticGame& g,
                                 const std::string& text) {
  const json j = json::parse(text);
  ModifiedSpec spec;
  const int s0 = g.state_index(j.at("s0").get<std::string>());
  if (s0 < 0) throw std::runtime_error("spec json: unknown s0");
  spec.s0 = s0;
  if (j.at("lambda").is_array()) {
    for (const auto& l : j["lambda"]) spec.lambdas.push_back(l.get<double>());
    if (static_cast<int>(spec.lambdas.size()) != g.num_players())
      throw std::runtime_error("spec json: lambda array length mismatch");
  } else {
    spec.lambdas.assign(g.num_players(), j["lambda"].get<double>());
  }
  const auto& per = j.at("per_player");
  if (static_cast<int>(per.size()) != g.num_players())
    throw std::runtime_error("spec json: per_player length mismatch");
  for (const auto& entry : per) {
    std::vector<std::vector<int>> blocks;
    for (const auto& blk : entry.at("partition")) {
      std::vector<int> b;
      for (const auto& sn : blk) {
        const int s = g.state_index(sn.get<std::string>());
        if (s < 0) throw std::runtime_error("spec json: unknown state in partition");
        b.push_back(s);
      }
      blocks.push_back(b);
    }
    spec.partitions.push_back(Partition::from_blocks(g.num_states(), blocks));
    CutoffVector c;
    for (const auto& v : entry.at("cutoffs")) c.push_back(v.get<double>());
    if (c.size() != blocks.size())
      throw std::runtime_error("spec json: cutoff count mismatch");
    spec.cutoffs.push_back(c);
  }
  return spec;
}

ModifiedSpec load_spec(const StochasticGame& g, const std::string& path) {
  return spec_from_json_text(g, read_file(path));
}

std::string spec_to_json_text(const StochasticGame& g,
                              const ModifiedSpec& spec) {
  ordered_json j;
  j["s0"] = g.states[spec.s0];
  if (spec.shared_lambda())
    j["lambda"] = spec.lambdas[0];
  else
    j["lambda"] = spec.lambdas;
  j["per_player"] = ordered_json::array();
  for (int i = 0; i < g.num_players(); ++i) {
    ordered_json entry;
    entry["partition"] = ordered_json::array();
    for (const auto& blk : spec.partitions[i].blocks) {
      ordered_json names = ordered_json::array();
      for (int s : blk) names.push_back(g.states[s]);
      entry["partition"].push_back(names);
    }
    entry["cutoffs"] = spec.cutoffs[i];
    j["per_player"].push_back(entry);
  }
  return j.dump(2) + "\n";
}

}  // namespace sgsolve
