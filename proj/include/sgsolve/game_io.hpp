#pragma once

#include <string>

#include "sgsolve/game.hpp"

namespace sgsolve {

// Canonical JSON layout:
//   {"players":[...],
//    "states":[{"name":..., "actions":{player:[...]}}],
//    "payoffs":{state:{"a1|a2|...":[u1,u2,...]}},
//    "transitions":{state:{"a1|a2|...":{state:prob}}}}
// load_game throws std::runtime_error with field context on malformed input
// and renormalizes each transition row exactly once (rows must already sum to
// 1 within 1e-12).  save_game/load_game round-trip is the identity on
// validated games.
StochasticGame game_from_json_text(const std::string& text);
StochasticGame load_game(const std::string& path);
std::string game_to_json_text(const StochasticGame& g);
void save_game(const StochasticGame& g, const std::string& path);

// Stationary profile JSON: {player:{state:{action:prob}}}.
StationaryProfile profile_from_json_text(const StochasticGame& g,
                                         const std::string& text);
StationaryProfile load_profile(const StochasticGame& g,
                               const std::string& path);
std::string profile_to_json_text(const StochasticGame& g,
                                 const StationaryProfile& p);

}  // namespace sgsolve
