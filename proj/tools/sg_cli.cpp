// Command-line surface for the solver library: evaluation, best responses,
// equilibria, values, structure classification, the uniform-equilibrium
// pipeline, simulation, and reproduction tables for the bundled examples.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sgsolve/examples.hpp"
#include "sgsolve/game_io.hpp"
#include "sgsolve/modified.hpp"
#include "sgsolve/occupancy.hpp"
#include "sgsolve/simulate.hpp"
#include "sgsolve/structure.hpp"
#include "sgsolve/uniform.hpp"
#include "sgsolve/values.hpp"

namespace {

using nlohmann::ordered_json;
using namespace sgsolve;

constexpr const char* kVersion = "1.0.0";
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kExitValidation, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a 64-bit content hash, hex-encoded; used by the run manifest.
std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Manifest {
  std::string command;
  ordered_json inputs = ordered_json::object();
  std::uint64_t seed = 0;

  void add_input(const std::string& path) {
    inputs[path] = fnv1a_hex(read_file(path));
  }
  ordered_json json() const {
    ordered_json m;
    m["command"] = command;
    m["inputs"] = inputs;
    m["seed"] = seed;
    m["versions"] = {{"sg", kVersion}};
    return m;
  }
};

void emit(const ordered_json& out, const std::string& out_path,
          const std::string& format) {
  std::string text;
  if (format == "csv") {
    // Flatten to dotted leaf paths, one "path,value" row per leaf.
    std::ostringstream ss;
    const std::function<void(const std::string&, const ordered_json&)> walk =
        [&](const std::string& prefix, const ordered_json& node) {
          if (!node.is_structured()) {
            ss << prefix << "," << node.dump() << "\n";
            return;
          }
          if (node.is_array()) {
            for (size_t i = 0; i < node.size(); ++i)
              walk(prefix + "." + std::to_string(i), node[i]);
          } else {
            for (const auto& [key, value] : node.items())
              walk(prefix.empty() ? key : prefix + "." + key, value);
          }
        };
    walk("", out);
    text = ss.str();
  } else {
    text = out.dump(2) + "\n";
  }
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    f << text;
  }
}

int state_of(const StochasticGame& g, const std::string& id) {
  const int s = g.state_index(id);
  if (s >= 0) return s;
  try {
    const int k = std::stoi(id);
    if (k >= 0 && k < g.num_states()) return k;
  } catch (...) {
  }
  throw CliError(kExitValidation, "unknown state: " + id);
}

int player_of(const StochasticGame& g, const std::string& id) {
  for (int i = 0; i < g.num_players(); ++i)
    if (g.players[i] == id) return i;
  try {
    const int k = std::stoi(id);
    if (k >= 1 && k <= g.num_players()) return k - 1;  // 1-based index
  } catch (...) {
  }
  throw CliError(kExitValidation, "unknown player: " + id);
}

StochasticGame load_checked(const std::string& path, Manifest& manifest) {
  manifest.add_input(path);
  StochasticGame g;
  try {
    g = load_game(path);
  } catch (const std::exception& e) {
    throw CliError(kExitValidation, e.what());
  }
  const std::vector<std::string> issues = validate(g);
  if (!issues.empty())
    throw CliError(kExitValidation, "invalid game: " + issues.front());
  return g;
}

StationaryProfile profile_arg(const StochasticGame& g, const std::string& path,
                              Manifest& manifest) {
  if (path.empty() || path == "uniform") return uniform_profile(g);
  manifest.add_input(path);
  try {
    return profile_from_json_text(g, read_file(path));
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError(kExitValidation, e.what());
  }
}

ordered_json profile_json(const StochasticGame& g,
                          const StationaryProfile& p) {
  return ordered_json::parse(profile_to_json_text(g, p));
}

ordered_json strategy_json(const StochasticGame& g, int player,
                           const StationaryStrategy& x) {
  ordered_json out = ordered_json::object();
  for (int s = 0; s < g.num_states(); ++s) {
    ordered_json row = ordered_json::object();
    for (int a = 0; a < g.num_actions(s, player); ++a)
      row[g.actions[s][player][a]] = x.prob[s][a];
    out[g.states[s]] = row;
  }
  return out;
}

ordered_json spec_json(const StochasticGame& g, const ModifiedSpec& spec) {
  return ordered_json::parse(spec_to_json_text(g, spec));
}

struct Options {
  std::string game, s0, profile, spec, player, kind = "minmax";
  std::string out, format = "json";
  double lambda = 0.5, eps = 1e-4;
  std::vector<double> lambda_grid;
  std::uint64_t seed = 1;
  int jobs = 1, horizon = 100, plays = 1000;
  bool extrapolate = false;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--out", opt.out, "write output here instead of stdout");
  cmd->add_option("--format", opt.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", opt.seed, "RNG seed");
  cmd->add_option("--jobs", opt.jobs, "parallelism (1 = deterministic)");
}

ModifiedSpec spec_arg(const StochasticGame& g, const Options& opt,
                      Manifest& manifest, bool lambda_set) {
  if (opt.spec.empty())
    return unmodified_spec(g, opt.s0.empty() ? 0 : state_of(g, opt.s0),
                           opt.lambda);
  manifest.add_input(opt.spec);
  try {
    ModifiedSpec spec = spec_from_json_text(g, read_file(opt.spec));
    if (!opt.s0.empty()) spec.s0 = state_of(g, opt.s0);
    if (lambda_set)
      for (double& l : spec.lambdas) l = opt.lambda;
    return spec;
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError(kExitValidation, e.what());
  }
}

// ---------------------------------------------------------------------------
// reproduce tables

ordered_json reproduce_example2(const std::string& dir, bool& ok) {
  const StochasticGame g = example2_game();
  save_game(g, dir + "/example2.json");
  ordered_json rows = ordered_json::array();
  for (double l : {0.5, 0.9, 0.99, 0.999}) {
    const ModifiedSpec spec = example2_spec(g, 0, l);
    const StationaryProfile x = uniform_profile(g);
    const OccupationVector occ = occupation_stationary(g, 0, l, x);
    const double gamma = discounted_payoff(g, occ)[0];
    const double modified = modified_payoff(g, spec, occ, 0);
    rows.push_back({{"lambda", l}, {"gamma", gamma}, {"modified", modified}});
    if (std::abs(gamma - 6.0 * l / (1.0 + l)) > 1e-9) ok = false;
    if (std::abs(modified - 4.0 * l / (1.0 + l)) > 1e-9) ok = false;
  }
  return rows;
}

ordered_json reproduce_bigmatch(const std::string& dir, bool& ok) {
  const StochasticGame g = big_match_game();
  save_game(g, dir + "/bigmatch.json");
  ordered_json rows = ordered_json::array();
  for (double l : {0.5, 0.9, 0.99}) {
    const ModifiedSpec spec = big_match_spec(g, 0, l);
    const StatSearchResult r = modified_maxmin_stat(g, spec, 0);
    const double p = r.profile.strategies[0].prob[0][0];
    // Discounted time at s0 before absorption under p(T).
    const double alpha = (1.0 - l) / (1.0 - l * (1.0 - p));
    rows.push_back(
        {{"lambda", l}, {"maxmin_stat", r.value}, {"alpha", alpha}});
    if (std::abs(r.value - 1.0 / 3.0) > 1e-3) ok = false;
    if (std::abs(alpha - 2.0 / 3.0) > 1e-2) ok = false;
  }
  return rows;
}

ordered_json reproduce_example1(const std::string& dir, bool& ok) {
  const StochasticGame g = example1_game(6.0 / 7.0, 0.5);
  save_game(g, dir + "/example1.json");
  ordered_json rows = ordered_json::array();
  for (int s0 : {0, 1}) {
    const ModifiedSpec spec = example1_spec(g, s0, 0.6);
    const BestResponse br =
        modified_best_response(g, spec, 0, uniform_profile(g));
    const std::vector<double>& at_s1 = br.strategy.prob[1];
    const std::string action = at_s1[0] >= at_s1[1] ? "T" : "B";
    rows.push_back({{"s0", g.states[s0]}, {"action_at_s1", action}});
    if (s0 == 0 && action != "B") ok = false;
    if (s0 == 1 && action != "T") ok = false;
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite stochastic game solver"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* c_validate = app.add_subcommand("validate", "check a game file");
  CLI::App* c_eval = app.add_subcommand("eval", "discounted payoff");
  CLI::App* c_meval =
      app.add_subcommand("modified-eval", "partition-and-cutoff payoff");
  CLI::App* c_br = app.add_subcommand("best-response",
                                      "exact best response (LP)");
  CLI::App* c_eq =
      app.add_subcommand("equilibrium", "stationary equilibrium search");
  CLI::App* c_values = app.add_subcommand("values", "min-max / max-min value");
  CLI::App* c_classify =
      app.add_subcommand("classify", "value blocks and controllability");
  CLI::App* c_ueq = app.add_subcommand("uniform-eq",
                                       "uniform equilibrium pipeline");
  CLI::App* c_sim = app.add_subcommand("simulate", "sample a play");
  CLI::App* c_repro =
      app.add_subcommand("reproduce", "bundled example tables");
  std::string repro_name, repro_dir = ".";

  for (CLI::App* c : {c_validate, c_eval, c_meval, c_br, c_eq, c_values,
                      c_classify, c_ueq, c_sim}) {
    c->add_option("--game", opt.game, "game JSON file")->required();
    add_common(c, opt);
  }
  for (CLI::App* c : {c_eval, c_meval, c_br, c_eq, c_ueq, c_sim})
    c->add_option("--s0", opt.s0, "initial state");
  for (CLI::App* c : {c_eval, c_meval, c_br, c_eq, c_values})
    c->add_option("--lambda", opt.lambda, "discount factor");
  c_values->add_option("--lambda-grid", opt.lambda_grid,
                       "grid for extrapolation");
  for (CLI::App* c : {c_eval, c_meval, c_sim})
    c->add_option("--profile", opt.profile,
                  "stationary profile JSON ('uniform' by default)");
  c_br->add_option("--profile", opt.profile, "opponents' stationary profile");
  for (CLI::App* c : {c_meval, c_br, c_eq})
    c->add_option("--spec", opt.spec, "modified-game spec JSON");
  for (CLI::App* c : {c_br, c_values})
    c->add_option("--player", opt.player, "player name or 1-based index")
        ->required();
  c_values->add_option("--kind", opt.kind, "minmax|maxmin")
      ->check(CLI::IsMember({"minmax", "maxmin"}));
  c_values->add_flag("--extrapolate", opt.extrapolate,
                     "limit value via a discount grid");
  for (CLI::App* c : {c_eq, c_ueq}) c->add_option("--eps", opt.eps);
  c_sim->add_option("--horizon", opt.horizon, "stages to sample");
  c_repro->add_option("name", repro_name, "example1|example2|bigmatch")
      ->required()
      ->check(CLI::IsMember({"example1", "example2", "bigmatch"}));
  c_repro->add_option("--dir", repro_dir, "artifact directory");
  add_common(c_repro, opt);

  CLI11_PARSE(app, argc, argv);

  Manifest manifest;
  manifest.seed = opt.seed;
  ordered_json out;
  try {
    if (app.got_subcommand(c_validate)) {
      manifest.command = "validate";
      manifest.add_input(opt.game);
      StochasticGame g;
      try {
        g = load_game(opt.game);
      } catch (const std::exception& e) {
        throw CliError(kExitValidation, e.what());
      }
      const std::vector<std::string> issues = validate(g);
      out["valid"] = issues.empty();
      out["issues"] = issues;
      if (!issues.empty()) {
        out["manifest"] = manifest.json();
        emit(out, opt.out, opt.format);
        return kExitValidation;
      }
    } else if (app.got_subcommand(c_eval)) {
      manifest.command = "eval";
      const StochasticGame g = load_checked(opt.game, manifest);
      const StationaryProfile x = profile_arg(g, opt.profile, manifest);
      const int s0 = state_of(g, opt.s0);
      const OccupationVector occ =
          occupation_stationary(g, s0, opt.lambda, x);
      out["lambda"] = opt.lambda;
      out["payoff"] = discounted_payoff(g, occ);
    } else if (app.got_subcommand(c_meval)) {
      manifest.command = "modified-eval";
      const StochasticGame g = load_checked(opt.game, manifest);
      const StationaryProfile x = profile_arg(g, opt.profile, manifest);
      const ModifiedSpec spec =
          spec_arg(g, opt, manifest, c_meval->count("--lambda") > 0);
      out["lambda"] = spec.lambdas[0];
      out["payoff"] = modified_payoff_profile(g, spec, x);
    } else if (app.got_subcommand(c_br)) {
      manifest.command = "best-response";
      const StochasticGame g = load_checked(opt.game, manifest);
      const StationaryProfile x = profile_arg(g, opt.profile, manifest);
      const ModifiedSpec spec =
          spec_arg(g, opt, manifest, c_br->count("--lambda") > 0);
      const int player = player_of(g, opt.player);
      const BestResponse br = modified_best_response(g, spec, player, x);
      out["player"] = g.players[player];
      out["value"] = br.value;
      out["strategy"] = strategy_json(g, player, br.strategy);
    } else if (app.got_subcommand(c_eq)) {
      manifest.command = "equilibrium";
      const StochasticGame g = load_checked(opt.game, manifest);
      const ModifiedSpec spec =
          spec_arg(g, opt, manifest, c_eq->count("--lambda") > 0);
      const EquilibriumResult eq =
          stationary_equilibrium(g, spec, opt.eps, 20, opt.seed);
      out["certified"] = eq.certified;
      out["payoffs"] = eq.payoffs;
      out["gaps"] = eq.gaps;
      out["profile"] = profile_json(g, eq.profile);
      out["spec"] = spec_json(g, spec);
      if (!eq.certified) {
        out["manifest"] = manifest.json();
        emit(out, opt.out, opt.format);
        return kExitSolver;
      }
    } else if (app.got_subcommand(c_values)) {
      manifest.command = "values";
      const StochasticGame g = load_checked(opt.game, manifest);
      const int player = player_of(g, opt.player);
      const ValueKind kind =
          opt.kind == "minmax" ? ValueKind::kMinmax : ValueKind::kMaxmin;
      out["player"] = g.players[player];
      out["kind"] = opt.kind;
      if (opt.extrapolate) {
        const UniformValueEstimate est =
            uniform_value(g, player, kind, opt.lambda_grid);
        out["limit"] = est.limit;
        out["fit_residual"] = est.fit_residual;
        out["fallback"] = est.fallback;
      } else {
        const ValueReport rep =
            kind == ValueKind::kMinmax
                ? discounted_minmax(g, player, opt.lambda)
                : discounted_maxmin(g, player, opt.lambda);
        out["lambda"] = opt.lambda;
        out["value"] = rep.value;
        out["iterations"] = rep.iterations;
      }
    } else if (app.got_subcommand(c_classify)) {
      manifest.command = "classify";
      const StochasticGame g = load_checked(opt.game, manifest);
      std::vector<std::vector<double>> values;
      for (int i = 0; i < g.num_players(); ++i)
        values.push_back(uniform_value(g, i, ValueKind::kMinmax).limit);
      const ClassificationReport rep =
          classify(g, values, 1e-3 * std::max(g.payoff_bound, 1.0));
      out["values"] = values;
      ordered_json blocks = ordered_json::array();
      for (int b = 0; b < rep.siblings.num_blocks(); ++b) {
        ordered_json blk;
        ordered_json names = ordered_json::array();
        for (int s : rep.siblings.blocks[b]) names.push_back(g.states[s]);
        blk["states"] = names;
        switch (rep.tags[b].kind) {
          case BlockTag::kClosed:
            blk["kind"] = "closed";
            break;
          case BlockTag::kControllable:
            blk["kind"] = "controllable";
            blk["controller"] = g.players[rep.tags[b].witness.controller];
            blk["exit_state"] = g.states[rep.tags[b].witness.exit_state];
            blk["quit_action"] =
                g.actions[rep.tags[b].witness.exit_state]
                         [rep.tags[b].witness.controller]
                         [rep.tags[b].witness.quit_action];
            break;
          default:
            blk["kind"] = "neither";
        }
        blocks.push_back(blk);
      }
      out["blocks"] = blocks;
      out["strongly_controllable"] = rep.strongly_controllable;
    } else if (app.got_subcommand(c_ueq)) {
      manifest.command = "uniform-eq";
      const StochasticGame g = load_checked(opt.game, manifest);
      const int s0 = state_of(g, opt.s0);
      const double eps = opt.eps < 1e-3 ? 0.1 : opt.eps;
      PipelineResult pr;
      try {
        pr = build_uniform_equilibrium(g, s0, eps, opt.seed);
      } catch (const std::exception& e) {
        throw CliError(kExitSolver, e.what());
      }
      const UniformEqReport rep =
          verify_uniform_eq(g, pr.sigma, s0, eps, pr.values);
      out["eps"] = eps;
      out["pass"] = rep.pass;
      out["memory_bound"] = pr.sigma.memory_bound;
      out["notes"] = pr.sigma.notes;
      ordered_json points = ordered_json::array();
      for (size_t p = 0; p < rep.point_names.size(); ++p)
        points.push_back({{"point", rep.point_names[p]},
                          {"payoff", rep.payoff[p]},
                          {"floor_margin", rep.floor_margin[p]}});
      out["points"] = points;
      out["max_gain"] = rep.max_gain;
      out["worst_probe"] = {{"kind", rep.worst.kind},
                            {"player", rep.worst.player}};
      if (!rep.pass) {
        out["manifest"] = manifest.json();
        emit(out, opt.out, opt.format);
        return kExitSolver;
      }
    } else if (app.got_subcommand(c_sim)) {
      manifest.command = "simulate";
      const StochasticGame g = load_checked(opt.game, manifest);
      const StationaryProfile x = profile_arg(g, opt.profile, manifest);
      const int s0 = state_of(g, opt.s0);
      std::vector<AutomatonStrategy> autos;
      for (int i = 0; i < g.num_players(); ++i)
        autos.push_back(as_automaton(g, x.strategies[i]));
      const PlayRecord play = simulate(g, autos, s0, opt.horizon, opt.seed);
      ordered_json stages = ordered_json::array();
      for (size_t n = 0; n < play.profiles.size(); ++n)
        stages.push_back({{"state", g.states[play.states[n]]},
                          {"profile", g.profile_key(play.states[n],
                                                    play.profiles[n])},
                          {"payoff", play.payoffs[n]}});
      out["stages"] = stages;
      out["final_state"] = g.states[play.states.back()];
    } else if (app.got_subcommand(c_repro)) {
      manifest.command = "reproduce " + repro_name;
      std::filesystem::create_directories(repro_dir);
      bool ok = true;
      if (repro_name == "example2")
        out["table"] = reproduce_example2(repro_dir, ok);
      else if (repro_name == "bigmatch")
        out["table"] = reproduce_bigmatch(repro_dir, ok);
      else
        out["table"] = reproduce_example1(repro_dir, ok);
      out["check"] = ok ? "pass" : "fail";
      if (!ok) {
        out["manifest"] = manifest.json();
        emit(out, opt.out, opt.format);
        return kExitSolver;
      }
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  out["manifest"] = manifest.json();
  emit(out, opt.out, opt.format);
  return 0;
}
