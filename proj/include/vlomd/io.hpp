#pragma once

#include <string>
#include <vector>

#include "vlomd/certified.hpp"
#include "vlomd/game.hpp"

namespace vlomd {

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double x);

// Game files: UTF-8 JSON with fields num_agents, horizon, num_states,
// action_counts, initial_state, rewards[h][s][ja] (per-agent array) and
// transitions[h][s][ja] (next-state probability array); ja is the flattened
// joint action with agent 0 most significant. Loading renormalizes transition
// rows within 1e-9 of summing to 1 and then validates; invalid games throw
// with the full violation report.
void write_game_json(const MarkovGame& game, const std::string& path);
MarkovGame load_game_json(const std::string& path);

// Trajectory dumps: one CSV per agent with header k,h,s,theta_0..theta_{A-1};
// k and h are 1-based, s is the 0-based state id, one row per visit in
// episode order. Floats round-trip exactly via format_double.
void write_trajectory_csv(const TrajectoryStore& store, int agent, const std::string& path);

// Rebuilds a store from one dump per agent, cross-validating that the files
// describe the same run of the given game. Errors name the offending (k,h,s).
TrajectoryStore load_trajectory_csvs(const std::vector<std::string>& paths,
                                     const MarkovGame& game);

}  // namespace vlomd
